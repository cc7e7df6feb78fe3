#pragma once

#include <filesystem>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "gs/graph.hpp"

namespace gs {

struct PprConfig {
    double damping = 0.85;
    double tolerance = 1e-8; // L1 residual
    int max_iterations = 100;
    int pool_size = 50; // M

    std::uint64_t hash() const;
};

struct PprScores {
    std::vector<double> score;
    int iterations_used = 0;
    bool converged = false;
};

// Power iteration of p <- (1-d)*e_anchor + d*W^T p over the row-stochastic
// transition; dangling nodes teleport their mass to the anchor so the
// distribution stays personalized and sums to one.
PprScores personalized_pagerank(const GraphView& g, NodeId anchor, const PprConfig& cfg);

// Top-m nodes by score, anchor excluded, zero-mass nodes dropped,
// ties broken by ascending NodeId.
std::vector<NodeId> global_neighbor_set(const PprScores& scores, NodeId anchor, int m);

// Lazy per-anchor pool cache. Entries persist under `dir` keyed by
// (anchor, config hash); writes are write-temp-then-rename so concurrent
// rollouts can share a cache directory. Masked views are computed fresh and
// never persisted (their pools depend on the hidden edge).
class PprCache {
public:
    PprCache(std::filesystem::path dir, const AttributedGraph& g);

    std::vector<NodeId> top_m(const GraphView& g, NodeId anchor, const PprConfig& cfg);

private:
    std::filesystem::path dir_;
    const AttributedGraph* graph_;
    std::mutex mutex_;
    std::unordered_map<std::uint64_t, std::vector<NodeId>> memo_;

    std::filesystem::path entry_path(NodeId anchor, const PprConfig& cfg) const;
    bool read_entry(const std::filesystem::path& path, std::vector<NodeId>& out) const;
    void write_entry(const std::filesystem::path& path, NodeId anchor, const PprConfig& cfg,
                     const std::vector<NodeId>& pool, const PprScores& scores) const;
};

} // namespace gs
