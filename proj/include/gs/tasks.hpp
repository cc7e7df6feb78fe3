#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gs/prompt.hpp"
#include "gs/rollout.hpp"

namespace gs {

struct TaskInstance {
    TaskKind kind = TaskKind::NodeClassification;
    std::vector<NodeId> anchors; // one node, or a pair for link prediction
    std::string gold_label;      // classification
    bool gold_link = false;      // link prediction
    // Positive link edges are hidden from every retrieval pool while their
    // own instance runs, so the answer cannot leak through evidence.
    std::optional<std::pair<NodeId, NodeId>> masked_edge;
};

// Instances file, classification: `external_id <TAB> gold_label`.
std::vector<TaskInstance> load_classification_instances(const std::filesystem::path& path,
                                                        const AttributedGraph& g,
                                                        const std::vector<std::string>& classes);

// Instances file, link prediction: `external_id <TAB> external_id <TAB> {1|0}`.
std::vector<TaskInstance> load_link_instances(const std::filesystem::path& path,
                                              const AttributedGraph& g);

// n_pos existing edges (masked during their rollouts) and n_neg non-edges,
// sampled uniformly; deterministic under seed.
std::vector<TaskInstance> build_link_instances(const AttributedGraph& g, std::size_t n_pos,
                                               std::size_t n_neg, std::uint64_t seed);

// Class list derived from graph labels (sorted unique).
std::vector<std::string> derive_class_list(const AttributedGraph& g);

enum class BaselineMode { GraphAware, StructureAgnostic };

struct LatencyStats {
    double mean_us = 0.0;
    double median_us = 0.0;
    double p95_us = 0.0;
    std::size_t samples = 0;
};

struct EvalReport {
    struct InstanceOutcome {
        std::size_t index = 0;
        std::string anchor;
        std::string gold;
        std::string predicted;
        bool correct = false;
        std::string failure; // error kind name, empty on success
        std::size_t searches = 0;
        std::size_t tokens_total = 0;
    };

    std::size_t n = 0;
    double accuracy = 0.0;
    std::vector<InstanceOutcome> outcomes;
    LatencyStats retrieval_latency;
    PhaseTokens token_totals;
    double phase_shares[4] = {0, 0, 0, 0}; // think, search, information, answer
    double parse_fallback_rate = 0.0;      // searches that fell back to local/hop=1
    double ring_fill_rate = 0.0;           // recursive searches topped up from the global pool
    std::map<std::string, std::size_t> failure_counts;

    std::string to_text() const;
    std::string to_csv() const;
};

struct EvalOptions {
    BaselineMode mode = BaselineMode::GraphAware;
    int in_flight = 8; // concurrent rollouts
    PromptSpec base_spec;
    std::vector<std::string> class_list; // classification
    bool three_mode_templates = false;
};

// Runs one rollout per instance (concurrently up to in_flight), aggregates
// accuracy, latency, token shares, and failure counts. Per-instance failures
// are recorded, never fatal.
EvalReport run_eval(const std::vector<TaskInstance>& instances, const BackendFactory& backends,
                    const Retriever& retriever, const RolloutConfig& rollout_cfg,
                    const EvalOptions& options);

struct BenchResult {
    std::size_t n_queries = 0;
    double graph_mean_us = 0.0;
    double agnostic_mean_us = 0.0;
    double speedup = 0.0;
    std::vector<std::size_t> graph_scored;    // per query
    std::vector<std::size_t> agnostic_scored; // per query
    std::uint64_t wall_clock_ms = 0;

    std::string to_text() const;
};

// Issues the same (anchor, query) pairs through graph-aware hop-1 retrieval
// and the structure-agnostic full-corpus comparator, timing each retrieve.
// With control=true both sides run graph-aware retrieval, so the expected
// speedup is 1.0 up to measurement noise.
BenchResult bench_retrieval(const AttributedGraph& g, const EmbeddingTable& embeddings,
                            PprCache& ppr, std::size_t n_queries, std::uint64_t seed,
                            int threads = 0, bool control = false);

} // namespace gs
