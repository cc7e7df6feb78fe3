#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gs/backend.hpp"
#include "gs/prompt.hpp"
#include "gs/query.hpp"
#include "gs/retriever.hpp"

namespace gs {

// Deterministic whitespace-plus-punctuation tokenization: maximal
// alphanumeric runs are one token each, every other printable character is
// its own token. A declared approximation used consistently for all phases.
std::size_t count_tokens(std::string_view text);

struct RolloutConfig {
    int max_search_steps = 8;
    TraversalMode traversal = TraversalMode::Flex;
    GenerationParams generation; // temperature 0.7, max_tokens 8192, stop </search>

    void validate() const;
};

struct PhaseTokens {
    std::size_t think = 0;
    std::size_t search = 0;
    std::size_t information = 0;
    std::size_t answer = 0;

    std::size_t total() const { return think + search + information + answer; }
};

struct SearchRecord {
    std::string raw;                      // block contents as emitted
    std::optional<StructuredQuery> query; // absent when the block had no text
    RankedResult result;
    std::optional<FallbackEvent> fallback;
    bool empty_query_error = false;
    bool ring_scoped = false; // recursive traversal assigned the scope
    int hop_used = 0;
};

struct RolloutTrace {
    std::string transcript; // generated region only; the prompt is not included
    std::vector<TaggedSpan> spans;
    PhaseTokens tokens;
    std::vector<SearchRecord> searches;
    std::optional<Answer> answer;
    std::optional<ErrorKind> failure;
    std::string failure_detail;
    std::uint64_t generate_us = 0;
    std::uint64_t retrieve_us = 0;

    // Structured-text record. Timings vary run to run, so deterministic
    // comparisons pass with_timings=false.
    std::string render(bool with_timings = true) const;
};

// Drives the think/search/answer loop: generate until </search> or
// end-of-sequence, retrieve and inject <information> blocks, extract the
// final answer, and account tokens per phase.
class RolloutEngine {
public:
    RolloutEngine(const Retriever& retriever, RolloutConfig cfg);

    RolloutTrace run(ModelBackend& backend, const GraphView& view,
                     std::span<const NodeId> anchors, const PromptTemplate& tmpl,
                     const PromptSpec& spec, const AnswerSpec& answer_spec,
                     std::vector<RetrievalLogEntry>* retrieval_log = nullptr,
                     bool structure_agnostic = false) const;

    const RolloutConfig& config() const { return cfg_; }

private:
    const Retriever* retriever_;
    RolloutConfig cfg_;
};

} // namespace gs
