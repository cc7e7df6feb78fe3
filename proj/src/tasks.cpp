#include "gs/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "gs/synthetic.hpp"
#include "gs/text.hpp"

namespace gs {

std::vector<std::string> derive_class_list(const AttributedGraph& g) {
    std::set<std::string> classes;
    for (const auto& rec : g.nodes()) {
        if (rec.label) classes.insert(*rec.label);
    }
    return {classes.begin(), classes.end()};
}

std::vector<TaskInstance> load_classification_instances(const std::filesystem::path& path,
                                                        const AttributedGraph& g,
                                                        const std::vector<std::string>& classes) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open instances file " + path.string());
    std::vector<TaskInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string_view ext, gold = line;
        if (!split_once(gold, '\t', ext, gold)) {
            raise(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(line_no) +
                                                  ": expected `external_id<TAB>gold_label`");
        }
        TaskInstance inst;
        inst.kind = TaskKind::NodeClassification;
        inst.anchors = {g.require_external(trim(ext))};
        inst.gold_label = std::string(trim(gold));
        if (std::find(classes.begin(), classes.end(), inst.gold_label) == classes.end()) {
            raise(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(line_no) +
                                                  ": gold label \"" + inst.gold_label +
                                                  "\" is not in the class list");
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<TaskInstance> load_link_instances(const std::filesystem::path& path,
                                              const AttributedGraph& g) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open instances file " + path.string());
    std::vector<TaskInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string_view a, b, flag = line;
        if (!split_once(flag, '\t', a, flag) || !split_once(flag, '\t', b, flag)) {
            raise(ErrorKind::MalformedRecord,
                  path.string() + ":" + std::to_string(line_no) +
                      ": expected `external_id<TAB>external_id<TAB>{1|0}`");
        }
        std::string_view f = trim(flag);
        if (f != "1" && f != "0") {
            raise(ErrorKind::MalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": gold flag must be 1 or 0");
        }
        TaskInstance inst;
        inst.kind = TaskKind::LinkPrediction;
        NodeId u = g.require_external(trim(a));
        NodeId v = g.require_external(trim(b));
        if (u == v) {
            raise(ErrorKind::MalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": pair must be distinct nodes");
        }
        inst.anchors = {u, v};
        inst.gold_link = f == "1";
        if (inst.gold_link && g.has_edge(u, v)) inst.masked_edge = std::make_pair(u, v);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<TaskInstance> build_link_instances(const AttributedGraph& g, std::size_t n_pos,
                                               std::size_t n_neg, std::uint64_t seed) {
    if (g.edge_count() < n_pos) {
        raise(ErrorKind::InsufficientEdges, "graph has " + std::to_string(g.edge_count()) +
                                                " edges, need " + std::to_string(n_pos));
    }
    // flat edge list in (u < v) order for uniform sampling
    std::vector<std::pair<NodeId, NodeId>> edge_list;
    edge_list.reserve(g.edge_count());
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
            if (static_cast<NodeId>(u) < v) edge_list.emplace_back(static_cast<NodeId>(u), v);
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<TaskInstance> out;

    std::set<std::size_t> chosen;
    while (chosen.size() < n_pos) {
        chosen.insert(static_cast<std::size_t>(uniform_below(rng, edge_list.size())));
    }
    for (std::size_t idx : chosen) {
        TaskInstance inst;
        inst.kind = TaskKind::LinkPrediction;
        inst.anchors = {edge_list[idx].first, edge_list[idx].second};
        inst.gold_link = true;
        inst.masked_edge = edge_list[idx];
        out.push_back(std::move(inst));
    }

    const std::size_t n = g.node_count();
    std::set<std::uint64_t> seen;
    std::size_t made = 0;
    std::size_t attempts = 0;
    const std::size_t max_attempts = n_neg * 1000 + 1000;
    while (made < n_neg && attempts++ < max_attempts) {
        auto u = static_cast<NodeId>(uniform_below(rng, n));
        auto v = static_cast<NodeId>(uniform_below(rng, n));
        if (u == v || g.has_edge(u, v)) continue;
        std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
        if (!seen.insert(key).second) continue;
        TaskInstance inst;
        inst.kind = TaskKind::LinkPrediction;
        inst.anchors = {std::min(u, v), std::max(u, v)};
        inst.gold_link = false;
        out.push_back(std::move(inst));
        ++made;
    }
    if (made < n_neg) {
        raise(ErrorKind::InsufficientEdges, "could not sample enough non-edges");
    }
    return out;
}

namespace {

LatencyStats latency_stats(std::vector<std::uint64_t> micros) {
    LatencyStats stats;
    stats.samples = micros.size();
    if (micros.empty()) return stats;
    std::sort(micros.begin(), micros.end());
    double sum = 0;
    for (auto m : micros) sum += static_cast<double>(m);
    stats.mean_us = sum / static_cast<double>(micros.size());
    stats.median_us = static_cast<double>(micros[micros.size() / 2]);
    stats.p95_us = static_cast<double>(micros[std::min(micros.size() - 1,
                                                       micros.size() * 95 / 100)]);
    return stats;
}

} // namespace

EvalReport run_eval(const std::vector<TaskInstance>& instances, const BackendFactory& backends,
                    const Retriever& retriever, const RolloutConfig& rollout_cfg,
                    const EvalOptions& options) {
    if (options.in_flight < 1) raise(ErrorKind::ConfigInvalid, "in_flight must be >= 1");
    for (const auto& inst : instances) {
        if (inst.kind == TaskKind::NodeClassification && options.class_list.empty()) {
            raise(ErrorKind::ConfigInvalid, "classification eval needs a class list");
        }
    }

    const AttributedGraph& g = retriever.graph();
    const ParsePolicy policy = rollout_cfg.traversal == TraversalMode::Recursive
                                   ? ParsePolicy::Recursive
                                   : ParsePolicy::Flex;

    struct PerInstance {
        EvalReport::InstanceOutcome outcome;
        std::vector<std::uint64_t> retrieval_micros;
        PhaseTokens tokens;
        std::size_t fallback_searches = 0;
        std::size_t ring_fills = 0;
        std::size_t searches = 0;
    };
    std::vector<PerInstance> results(instances.size());

    RolloutEngine engine(retriever, rollout_cfg);
    DegreeStats degrees = degree_stats(g);

    auto run_one = [&](std::size_t idx) {
        const TaskInstance& inst = instances[idx];
        PerInstance& slot = results[idx];
        slot.outcome.index = idx;
        slot.outcome.anchor = g.node(inst.anchors[0]).external_id;

        PromptSpec spec = options.base_spec;
        spec.anchor_text = g.node(inst.anchors[0]).text;
        spec.degree = degrees.degree[inst.anchors[0]];
        spec.avg_degree = degrees.avg_degree;

        AnswerSpec answer_spec;
        PromptTemplate tmpl;
        if (inst.kind == TaskKind::NodeClassification) {
            spec.class_list = options.class_list;
            answer_spec.kind = Answer::Kind::ClassLabel;
            answer_spec.class_list = options.class_list;
            tmpl = PromptTemplate::builtin(TaskKind::NodeClassification, policy,
                                           options.three_mode_templates);
            slot.outcome.gold = inst.gold_label;
        } else {
            spec.anchor_text_b = g.node(inst.anchors[1]).text;
            answer_spec.kind = Answer::Kind::LinkYesNo;
            tmpl = PromptTemplate::builtin(TaskKind::LinkPrediction, policy,
                                           options.three_mode_templates);
            slot.outcome.gold = inst.gold_link ? "yes" : "no";
        }

        GraphView view = inst.masked_edge
                             ? GraphView(g, inst.masked_edge->first, inst.masked_edge->second)
                             : GraphView(g);

        try {
            auto backend = backends();
            std::vector<RetrievalLogEntry> log;
            RolloutTrace trace =
                engine.run(*backend, view, inst.anchors, tmpl, spec, answer_spec, &log,
                           options.mode == BaselineMode::StructureAgnostic);

            slot.tokens = trace.tokens;
            slot.searches = trace.searches.size();
            slot.outcome.searches = trace.searches.size();
            slot.outcome.tokens_total = trace.tokens.total();
            for (const auto& entry : log) {
                slot.retrieval_micros.push_back(entry.micros);
                if (entry.fallback) ++slot.ring_fills;
            }
            for (const auto& s : trace.searches) {
                if (s.fallback) ++slot.fallback_searches;
            }

            if (trace.answer) {
                if (inst.kind == TaskKind::NodeClassification) {
                    slot.outcome.predicted = trace.answer->label;
                    slot.outcome.correct = trace.answer->label == inst.gold_label;
                } else {
                    slot.outcome.predicted = trace.answer->yes ? "yes" : "no";
                    slot.outcome.correct = trace.answer->yes == inst.gold_link;
                }
            } else {
                slot.outcome.failure =
                    trace.failure ? to_string(*trace.failure) : "AnswerExtractionFailed";
            }
        } catch (const Error& e) {
            slot.outcome.failure = to_string(e.kind());
        }
    };

    const int workers =
        static_cast<int>(std::min<std::size_t>(options.in_flight, instances.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < instances.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t idx = cursor.fetch_add(1);
                    if (idx >= instances.size()) break;
                    run_one(idx);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    EvalReport report;
    report.n = instances.size();
    std::size_t correct = 0;
    std::vector<std::uint64_t> all_micros;
    std::size_t all_searches = 0, fallback_searches = 0, ring_fills = 0;
    for (auto& slot : results) {
        report.outcomes.push_back(slot.outcome);
        if (slot.outcome.correct) ++correct;
        if (!slot.outcome.failure.empty()) ++report.failure_counts[slot.outcome.failure];
        all_micros.insert(all_micros.end(), slot.retrieval_micros.begin(),
                          slot.retrieval_micros.end());
        report.token_totals.think += slot.tokens.think;
        report.token_totals.search += slot.tokens.search;
        report.token_totals.information += slot.tokens.information;
        report.token_totals.answer += slot.tokens.answer;
        all_searches += slot.searches;
        fallback_searches += slot.fallback_searches;
        ring_fills += slot.ring_fills;
    }
    report.accuracy = report.n == 0 ? 0.0
                                    : static_cast<double>(correct) / static_cast<double>(report.n);
    report.retrieval_latency = latency_stats(std::move(all_micros));
    std::size_t grand_total = report.token_totals.total();
    if (grand_total > 0) {
        report.phase_shares[0] =
            static_cast<double>(report.token_totals.think) / static_cast<double>(grand_total);
        report.phase_shares[1] =
            static_cast<double>(report.token_totals.search) / static_cast<double>(grand_total);
        report.phase_shares[2] =
            static_cast<double>(report.token_totals.information) / static_cast<double>(grand_total);
        report.phase_shares[3] =
            static_cast<double>(report.token_totals.answer) / static_cast<double>(grand_total);
    }
    if (all_searches > 0) {
        report.parse_fallback_rate =
            static_cast<double>(fallback_searches) / static_cast<double>(all_searches);
        report.ring_fill_rate =
            static_cast<double>(ring_fills) / static_cast<double>(all_searches);
    }
    return report;
}

std::string EvalReport::to_text() const {
    std::ostringstream os;
    os << "=== evaluation report ===\n";
    os << "instances: " << n << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "accuracy: %.4f\n", accuracy);
    os << buf;
    std::snprintf(buf, sizeof(buf),
                  "retrieval_latency_us: mean=%.1f median=%.1f p95=%.1f samples=%zu\n",
                  retrieval_latency.mean_us, retrieval_latency.median_us, retrieval_latency.p95_us,
                  retrieval_latency.samples);
    os << buf;
    os << "tokens: think=" << token_totals.think << " search=" << token_totals.search
       << " information=" << token_totals.information << " answer=" << token_totals.answer
       << " total=" << token_totals.total() << "\n";
    std::snprintf(buf, sizeof(buf),
                  "phase_shares: think=%.4f search=%.4f information=%.4f answer=%.4f\n",
                  phase_shares[0], phase_shares[1], phase_shares[2], phase_shares[3]);
    os << buf;
    std::snprintf(buf, sizeof(buf), "parse_fallback_rate: %.4f\nring_fill_rate: %.4f\n",
                  parse_fallback_rate, ring_fill_rate);
    os << buf;
    os << "failures:";
    if (failure_counts.empty()) os << " none";
    for (const auto& [kind, count] : failure_counts) os << " " << kind << "=" << count;
    os << "\n";
    return os.str();
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os << "index,anchor,gold,predicted,correct,failure,searches,tokens_total\n";
    for (const auto& o : outcomes) {
        os << o.index << "," << o.anchor << "," << o.gold << "," << o.predicted << ","
           << (o.correct ? 1 : 0) << "," << o.failure << "," << o.searches << ","
           << o.tokens_total << "\n";
    }
    return os.str();
}

BenchResult bench_retrieval(const AttributedGraph& g, const EmbeddingTable& embeddings,
                            PprCache& ppr, std::size_t n_queries, std::uint64_t seed,
                            int threads, bool control) {
    auto wall0 = std::chrono::steady_clock::now();

    RetrieverConfig graph_cfg = RetrieverConfig::defaults_for(TraversalMode::Flex);
    graph_cfg.alpha = 0.5;
    Retriever retriever(g, embeddings, ppr, graph_cfg);

    // identical (anchor, query) pairs on both sides
    std::mt19937_64 rng(seed);
    std::vector<NodeId> anchors(n_queries);
    std::vector<std::string> queries(n_queries);
    for (std::size_t i = 0; i < n_queries; ++i) {
        anchors[i] = static_cast<NodeId>(uniform_below(rng, g.node_count()));
        queries[i] = g.node(anchors[i]).text;
    }

    BenchResult result;
    result.n_queries = n_queries;
    result.graph_scored.resize(n_queries);
    result.agnostic_scored.resize(n_queries);
    std::vector<std::uint64_t> graph_us(n_queries), agnostic_us(n_queries);

    int n_threads = threads > 0 ? threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto run_split = [&](auto&& fn) {
        if (n_threads <= 1) {
            for (std::size_t i = 0; i < n_queries; ++i) fn(i);
            return;
        }
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < n_threads; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= n_queries) break;
                    fn(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    };

    run_split([&](std::size_t i) {
        StructuredQuery q;
        q.scope = Scope{ScopeKind::Local, 1};
        q.text = queries[i];
        TraversalState state;
        state.mode = TraversalMode::Flex;
        RetrievalLogEntry log;
        retriever.retrieve(GraphView(g), std::vector<NodeId>{anchors[i]}, q, state, &log);
        result.graph_scored[i] = log.scored_count;
        graph_us[i] = log.micros;
    });

    run_split([&](std::size_t i) {
        StructuredQuery q;
        q.text = queries[i];
        TraversalState state;
        state.mode = TraversalMode::Flex;
        RetrievalLogEntry log;
        if (control) {
            q.scope = Scope{ScopeKind::Local, 1};
            retriever.retrieve(GraphView(g), std::vector<NodeId>{anchors[i]}, q, state, &log);
        } else {
            retriever.retrieve_full_corpus(GraphView(g), std::vector<NodeId>{anchors[i]}, q,
                                           state, &log);
        }
        result.agnostic_scored[i] = log.scored_count;
        agnostic_us[i] = log.micros;
    });

    double graph_sum = 0, agnostic_sum = 0;
    for (std::size_t i = 0; i < n_queries; ++i) {
        graph_sum += static_cast<double>(graph_us[i]);
        agnostic_sum += static_cast<double>(agnostic_us[i]);
    }
    result.graph_mean_us = graph_sum / static_cast<double>(n_queries);
    result.agnostic_mean_us = agnostic_sum / static_cast<double>(n_queries);
    result.speedup =
        result.graph_mean_us > 0 ? result.agnostic_mean_us / result.graph_mean_us : 0.0;

    auto wall1 = std::chrono::steady_clock::now();
    result.wall_clock_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(wall1 - wall0).count());
    return result;
}

std::string BenchResult::to_text() const {
    std::ostringstream os;
    os << "=== retrieval benchmark ===\n";
    os << "queries: " << n_queries << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "graph_aware_mean_us: %.2f\n", graph_mean_us);
    os << buf;
    std::snprintf(buf, sizeof(buf), "structure_agnostic_mean_us: %.2f\n", agnostic_mean_us);
    os << buf;
    std::snprintf(buf, sizeof(buf), "speedup: %.2fx\n", speedup);
    os << buf;
    double g_mean = 0, a_mean = 0;
    for (std::size_t i = 0; i < graph_scored.size(); ++i) {
        g_mean += static_cast<double>(graph_scored[i]);
        a_mean += static_cast<double>(agnostic_scored[i]);
    }
    if (!graph_scored.empty()) {
        g_mean /= static_cast<double>(graph_scored.size());
        a_mean /= static_cast<double>(agnostic_scored.size());
    }
    std::snprintf(buf, sizeof(buf), "scored_nodes_mean: graph_aware=%.1f structure_agnostic=%.1f\n",
                  g_mean, a_mean);
    os << buf;
    os << "wall_clock_ms: " << wall_clock_ms << "\n";
    return os.str();
}

} // namespace gs
