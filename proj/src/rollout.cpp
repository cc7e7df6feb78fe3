#include "gs/rollout.hpp"

#include <cctype>
#include <chrono>
#include <sstream>

namespace gs {

std::size_t count_tokens(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        bool word_char = std::isalnum(c) || c >= 0x80;
        if (word_char) {
            if (!in_word) {
                ++count;
                in_word = true;
            }
        } else {
            in_word = false;
            if (!std::isspace(c)) ++count; // punctuation is a token of its own
        }
    }
    return count;
}

void RolloutConfig::validate() const {
    if (max_search_steps < 1) raise(ErrorKind::ConfigInvalid, "max_search_steps must be >= 1");
    if (generation.max_tokens < 1) raise(ErrorKind::ConfigInvalid, "max_tokens must be >= 1");
    if (generation.temperature < 0.0) raise(ErrorKind::ConfigInvalid, "temperature must be >= 0");
}

namespace {

constexpr const char* kEmptyQueryNotice =
    "Search error: the search block contained no usable query text. "
    "Refine your query or provide your final answer.";

constexpr const char* kFinalInstruction =
    "\nSearch limit reached. No further searches are allowed. "
    "Output your final answer now using the answer tags.\n";

} // namespace

RolloutEngine::RolloutEngine(const Retriever& retriever, RolloutConfig cfg)
    : retriever_(&retriever), cfg_(cfg) {
    cfg_.validate();
}

RolloutTrace RolloutEngine::run(ModelBackend& backend, const GraphView& view,
                                std::span<const NodeId> anchors, const PromptTemplate& tmpl,
                                const PromptSpec& spec, const AnswerSpec& answer_spec,
                                std::vector<RetrievalLogEntry>* retrieval_log,
                                bool structure_agnostic) const {
    using clock = std::chrono::steady_clock;
    auto elapsed_us = [](clock::time_point a, clock::time_point b) {
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(b - a).count());
    };

    RolloutTrace trace;
    std::string full = tmpl.render(spec); // prompt + generated region
    const std::size_t gen_base = full.size();

    TraversalState state;
    state.mode = cfg_.traversal;

    ParsePolicy policy =
        cfg_.traversal == TraversalMode::Recursive ? ParsePolicy::Recursive : ParsePolicy::Flex;

    auto append = [&](const std::string& text) { full += text; };
    auto gen_region = [&]() -> std::string_view {
        return std::string_view(full).substr(gen_base);
    };

    // Spans are assembled by the engine as the transcript grows, so
    // engine-injected <information> blocks are the only information spans;
    // information tags emitted by the model count as plain think text.
    auto absorb_model_spans = [&](const std::string& chunk, std::size_t chunk_base) {
        for (auto& span : extract_spans(chunk)) {
            if (span.phase == Phase::Information) continue;
            span.begin += chunk_base;
            span.end += chunk_base;
            trace.spans.push_back(std::move(span));
        }
    };

    int searches_done = 0;
    bool limit_notice_issued = false;
    bool budget_exceeded = false;

    while (true) {
        if (count_tokens(gen_region()) >= static_cast<std::size_t>(cfg_.generation.max_tokens)) {
            budget_exceeded = true;
            break;
        }
        GenerationParams params = cfg_.generation;
        params.max_tokens = cfg_.generation.max_tokens -
                            static_cast<int>(count_tokens(gen_region()));

        auto g0 = clock::now();
        Generation gen = backend.generate(full, params);
        trace.generate_us += elapsed_us(g0, clock::now());

        std::size_t chunk_base = full.size() - gen_base;
        append(gen.text);
        absorb_model_spans(gen.text, chunk_base);

        if (gen.finish == FinishReason::StopSequence) {
            if (limit_notice_issued || searches_done >= cfg_.max_search_steps) {
                trace.failure = ErrorKind::AnswerExtractionFailed;
                trace.failure_detail = "model kept searching after the step limit";
                break;
            }

            // query preceding the latest </search>, by direct scan so a
            // malformed surrounding tag cannot hide the block
            SearchRecord record;
            std::size_t close = gen.text.rfind("</search>");
            if (close != std::string::npos) {
                std::size_t open = gen.text.rfind("<search>", close);
                if (open != std::string::npos) {
                    open += std::string_view("<search>").size();
                    record.raw = gen.text.substr(open, close - open);
                }
            }
            std::string info_text;
            try {
                ParsedSearch parsed = parse_search_block(record.raw, policy);
                record.query = parsed.query;
                record.fallback = parsed.fallback;

                RetrievalLogEntry log_entry;
                auto r0 = clock::now();
                RankedResult result =
                    structure_agnostic
                        ? retriever_->retrieve_full_corpus(view, anchors, parsed.query, state,
                                                           &log_entry)
                        : retriever_->retrieve(view, anchors, parsed.query, state, &log_entry);
                trace.retrieve_us += elapsed_us(r0, clock::now());
                record.hop_used = log_entry.hop;
                record.ring_scoped = state.mode == TraversalMode::Recursive;
                record.result = std::move(result);
                info_text = retriever_->format_information(record.result);
                if (retrieval_log) retrieval_log->push_back(std::move(log_entry));
                if (state.mode == TraversalMode::Recursive) {
                    state.current_hop =
                        std::min(state.current_hop + 1, retriever_->config().hop_ceiling);
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::EmptyQueryText) throw;
                record.empty_query_error = true;
                info_text = kEmptyQueryNotice;
            }
            trace.searches.push_back(std::move(record));
            ++searches_done;

            append("\n<information>\n");
            TaggedSpan info_span;
            info_span.phase = Phase::Information;
            info_span.begin = full.size() - gen_base;
            append(info_text);
            info_span.end = full.size() - gen_base;
            info_span.text = info_text;
            trace.spans.push_back(std::move(info_span));
            append("\n</information>\n");

            if (searches_done >= cfg_.max_search_steps) {
                append(kFinalInstruction);
                limit_notice_issued = true;
            }
            continue;
        }

        // end of sequence
        if (gen.truncated) budget_exceeded = true;
        break;
    }

    trace.transcript = std::string(gen_region());

    // phase accounting: segment boundaries sit on tag punctuation, so
    // per-phase counts add up to the whole-transcript count exactly
    std::size_t total = count_tokens(trace.transcript);
    for (const auto& span : trace.spans) {
        switch (span.phase) {
        case Phase::Search: trace.tokens.search += count_tokens(span.text); break;
        case Phase::Information: trace.tokens.information += count_tokens(span.text); break;
        case Phase::Answer: trace.tokens.answer += count_tokens(span.text); break;
        case Phase::Think: break;
        }
    }
    trace.tokens.think =
        total - trace.tokens.search - trace.tokens.information - trace.tokens.answer;

    if (!trace.failure) {
        const TaggedSpan* answer_span = nullptr;
        for (const auto& span : trace.spans) {
            if (span.phase == Phase::Answer && !span.partial) answer_span = &span;
        }
        if (!answer_span) {
            trace.failure = budget_exceeded ? ErrorKind::TokenBudgetExceeded
                                            : ErrorKind::AnswerExtractionFailed;
            trace.failure_detail = budget_exceeded ? "token budget exhausted before an answer"
                                                   : "no closed answer block";
        } else {
            try {
                trace.answer = resolve_answer_text(answer_span->text, answer_spec);
            } catch (const Error& e) {
                trace.failure = ErrorKind::AnswerExtractionFailed;
                trace.failure_detail = e.what();
            }
        }
    }
    return trace;
}

std::string RolloutTrace::render(bool with_timings) const {
    std::ostringstream os;
    os << "=== rollout ===\n";
    if (answer) {
        if (answer->kind == Answer::Kind::ClassLabel) {
            os << "answer: " << answer->label << "\n";
        } else {
            os << "answer: " << (answer->yes ? "yes" : "no") << "\n";
        }
    } else if (failure) {
        os << "failure: " << to_string(*failure) << " (" << failure_detail << ")\n";
    }
    os << "tokens: think=" << tokens.think << " search=" << tokens.search
       << " information=" << tokens.information << " answer=" << tokens.answer
       << " total=" << tokens.total() << "\n";
    os << "searches: " << searches.size() << "\n";
    for (std::size_t i = 0; i < searches.size(); ++i) {
        const auto& s = searches[i];
        os << "  search " << (i + 1) << ": ";
        if (s.empty_query_error) {
            os << "empty-query error";
        } else if (s.query) {
            if (s.ring_scoped) {
                os << "query=\"" << s.query->text << "\" [ring hop " << s.hop_used << "]";
            } else {
                os << s.query->serialize();
                if (s.hop_used > 0) os << " [hop " << s.hop_used << "]";
            }
            if (s.fallback) os << " [fallback: " << s.fallback->reason << "]";
            os << " -> " << s.result.k_returned << " of " << s.result.scored_count << " scored";
        }
        os << "\n";
    }
    os << "spans:\n";
    for (const auto& span : spans) {
        os << "  " << phase_name(span.phase) << " [" << span.begin << "," << span.end << ")"
           << (span.partial ? " partial" : "") << "\n";
    }
    if (with_timings) {
        os << "timings_us: generate=" << generate_us << " retrieve=" << retrieve_us << "\n";
    }
    os << "transcript:\n" << transcript << "\n";
    return os.str();
}

} // namespace gs
