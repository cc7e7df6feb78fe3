#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "gs/embedding.hpp"
#include "gs/graph.hpp"
#include "gs/ppr.hpp"
#include "gs/query.hpp"

namespace gs {

enum class TraversalMode { Recursive, Flex };

const char* traversal_name(TraversalMode m);

struct RetrieverConfig {
    double alpha = 1.0; // anchor-vs-query weight in the hybrid score
    int k = 3;
    int hop_max = 2;
    int global_pool_size = 50;
    int attribute_pool_size = 50;
    int hop_ceiling = 4;               // recursive traversal stops advancing here
    std::size_t snippet_budget = 600;  // chars of attribute text injected per node
    std::uint8_t scope_union_mask = 0; // config-forced pool union; 0 = per-query scope

    static RetrieverConfig defaults_for(TraversalMode mode) {
        RetrieverConfig cfg;
        cfg.alpha = mode == TraversalMode::Recursive ? 1.0 : 0.5;
        return cfg;
    }

    void validate() const;
};

// Origin flags for candidate provenance.
enum PoolFlag : std::uint8_t {
    kPoolLocal = 1,
    kPoolGlobal = 2,
    kPoolAttribute = 4,
};

struct CandidateSet {
    std::vector<NodeId> members;         // ascending
    std::vector<std::uint8_t> provenance; // parallel to members
    std::uint8_t scope_used = 0;
    int hop_used = 0;                     // local/ring pools
    bool fallback_used = false;           // recursive sparse-ring fill
};

struct RankedEntry {
    NodeId id;
    double score;
};

struct RankedResult {
    std::vector<RankedEntry> entries; // score desc, ties by ascending id
    int k_requested = 0;
    int k_returned = 0;
    std::size_t scored_count = 0;
};

// Per-rollout traversal state. Recursive mode advances one ring per search;
// nodes already returned in this rollout never reappear as candidates.
struct TraversalState {
    TraversalMode mode = TraversalMode::Flex;
    int current_hop = 1;
    std::unordered_set<NodeId> returned;
};

// One line per search; feeds the efficiency benchmark.
struct RetrievalLogEntry {
    std::string anchor_external;
    std::string scope;
    int hop = 0;
    double alpha = 0.0;
    int k = 0;
    std::size_t candidate_count = 0;
    std::size_t scored_count = 0;
    std::uint64_t micros = 0;
    bool fallback = false;
    std::vector<std::pair<std::string, double>> returned;

    std::string to_line() const;
};

// Two-stage graph-aware retriever: topology-grounded candidate pools
// (local rings / global PPR pool / attribute similarity) ranked by
//   alpha * cos(attr_v, attr_anchor) + (1-alpha) * cos(attr_v, query).
class Retriever {
public:
    Retriever(const AttributedGraph& g, const EmbeddingTable& embeddings, PprCache& ppr,
              RetrieverConfig cfg, PprConfig ppr_cfg = {});

    CandidateSet build_candidates(const GraphView& view, std::span<const NodeId> anchors,
                                  const StructuredQuery& q, TraversalState& state) const;

    double score_candidate(NodeId v, NodeId anchor, const Vector* query_vec,
                           double query_norm) const;

    RankedResult retrieve(const GraphView& view, std::span<const NodeId> anchors,
                          const StructuredQuery& q, TraversalState& state,
                          RetrievalLogEntry* log = nullptr) const;

    // Structure-agnostic comparator: scores the whole corpus minus the
    // anchors by query similarity alone.
    RankedResult retrieve_full_corpus(const GraphView& view, std::span<const NodeId> anchors,
                                      const StructuredQuery& q, TraversalState& state,
                                      RetrievalLogEntry* log = nullptr) const;

    // Numbered evidence list for <information> injection. Attribute text is
    // truncated to the snippet budget; labels are never included.
    std::string format_information(const RankedResult& result) const;

    const RetrieverConfig& config() const { return cfg_; }
    const AttributedGraph& graph() const { return *graph_; }
    const EmbeddingTable& embeddings() const { return *embeddings_; }

private:
    const AttributedGraph* graph_;
    const EmbeddingTable* embeddings_;
    PprCache* ppr_;
    RetrieverConfig cfg_;
    PprConfig ppr_cfg_;

    NodeId effective_anchor(std::span<const NodeId> anchors, const StructuredQuery& q) const;
    std::vector<NodeId> attribute_pool(NodeId anchor, std::span<const NodeId> anchors) const;
    RankedResult rank(const GraphView& view, const CandidateSet& candidates, NodeId anchor,
                      const StructuredQuery& q, TraversalState& state, double forced_alpha,
                      RetrievalLogEntry* log, std::uint64_t build_us) const;
};

} // namespace gs
