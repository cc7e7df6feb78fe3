#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gs/error.hpp"

namespace gs {

// Dense node index, assigned in nodes-file order at ingestion.
using NodeId = std::uint32_t;

struct NodeRecord {
    NodeId id = 0;
    std::string external_id;
    std::string text;
    std::optional<std::string> label; // held out of prompts during evaluation
};

struct IngestReport {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_collapsed = 0;

    std::string to_text() const;
};

// Immutable attributed graph over sorted CSR adjacency. Undirected: every
// edge is stored in both neighbor lists. Safe for unlimited concurrent reads.
class AttributedGraph {
public:
    // Nodes file: `external_id <TAB> label <TAB> text` per line (`-` = unlabeled).
    // Edges file: `external_id <TAB> external_id` per line.
    static AttributedGraph load(const std::filesystem::path& nodes_path,
                                const std::filesystem::path& edges_path,
                                IngestReport* report = nullptr);

    // Build from in-memory parts; dedupes and drops self-loops like load().
    static AttributedGraph from_parts(std::vector<NodeRecord> nodes,
                                      const std::vector<std::pair<NodeId, NodeId>>& edges,
                                      IngestReport* report = nullptr);

    static AttributedGraph load_binary(const std::filesystem::path& path);
    void save_binary(const std::filesystem::path& path) const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    const NodeRecord& node(NodeId v) const;
    std::span<const NodeId> neighbors(NodeId v) const;
    std::size_t degree(NodeId v) const { return neighbors(v).size(); }
    double avg_degree() const;

    bool has_edge(NodeId u, NodeId v) const;
    std::optional<NodeId> find_external(std::string_view external_id) const;
    NodeId require_external(std::string_view external_id) const;
    void check_node(NodeId v) const;

    const std::vector<NodeRecord>& nodes() const { return nodes_; }

private:
    std::vector<NodeRecord> nodes_;
    std::vector<std::size_t> offsets_;   // CSR row starts, size N+1
    std::vector<NodeId> adjacency_;      // sorted within each row
    std::size_t edge_count_ = 0;
    std::unordered_map<std::string, NodeId> external_index_;
};

// Read adapter that can hide a single undirected edge. Used by link-prediction
// evaluation so a held-out edge is invisible to every retrieval pool.
class GraphView {
public:
    GraphView(const AttributedGraph& g) : graph_(&g) {}
    GraphView(const AttributedGraph& g, NodeId a, NodeId b)
        : graph_(&g), mask_(std::make_pair(a, b)) {}

    const AttributedGraph& graph() const { return *graph_; }
    std::size_t node_count() const { return graph_->node_count(); }
    bool masked() const { return mask_.has_value(); }
    std::optional<std::pair<NodeId, NodeId>> masked_edge() const { return mask_; }

    std::size_t degree(NodeId v) const {
        std::size_t d = graph_->degree(v);
        if (mask_ && (mask_->first == v || mask_->second == v) &&
            graph_->has_edge(mask_->first, mask_->second)) {
            --d;
        }
        return d;
    }

    template <typename F>
    void for_neighbors(NodeId v, F&& fn) const {
        for (NodeId w : graph_->neighbors(v)) {
            if (mask_ && ((mask_->first == v && mask_->second == w) ||
                          (mask_->second == v && mask_->first == w))) {
                continue;
            }
            fn(w);
        }
    }

private:
    const AttributedGraph* graph_;
    std::optional<std::pair<NodeId, NodeId>> mask_;
};

// All nodes within `hops` of the anchor, anchor excluded, ascending order.
std::vector<NodeId> hop_neighborhood(const GraphView& g, NodeId anchor, int hops);

// Nodes at exactly shortest-path distance `hop` from the anchor, ascending.
std::vector<NodeId> exact_hop_ring(const GraphView& g, NodeId anchor, int hop);

struct DegreeStats {
    std::vector<std::size_t> degree;
    double avg_degree = 0.0;
};

DegreeStats degree_stats(const AttributedGraph& g);

} // namespace gs
