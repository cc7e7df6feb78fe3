#include "gs/graph.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <fstream>
#include <sstream>

#include "gs/text.hpp"

namespace gs {

static_assert(std::endian::native == std::endian::little,
              "binary graph format is little-endian");

std::string IngestReport::to_text() const {
    std::ostringstream os;
    os << "nodes: " << nodes << "\n"
       << "edges: " << edges << "\n"
       << "self_loops_dropped: " << self_loops_dropped << "\n"
       << "duplicates_collapsed: " << duplicates_collapsed << "\n";
    return os.str();
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

} // namespace

AttributedGraph AttributedGraph::load(const std::filesystem::path& nodes_path,
                                      const std::filesystem::path& edges_path,
                                      IngestReport* report) {
    std::vector<NodeRecord> nodes;
    std::unordered_map<std::string, NodeId> index;

    std::size_t line_no = 0;
    for (const std::string& line : read_lines(nodes_path)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string_view rest = line, ext, label;
        if (!split_once(rest, '\t', ext, rest) || !split_once(rest, '\t', label, rest)) {
            raise(ErrorKind::MalformedRecord,
                  nodes_path.string() + ":" + std::to_string(line_no) +
                      ": expected `external_id<TAB>label<TAB>text`");
        }
        NodeRecord rec;
        rec.external_id = std::string(trim(ext));
        rec.text = std::string(trim(rest));
        std::string_view label_t = trim(label);
        if (!label_t.empty() && label_t != "-") rec.label = std::string(label_t);
        if (rec.external_id.empty()) {
            raise(ErrorKind::MalformedRecord, nodes_path.string() + ":" +
                                                  std::to_string(line_no) + ": empty external_id");
        }
        if (tokenize_text(rec.text).empty()) {
            raise(ErrorKind::MalformedRecord, nodes_path.string() + ":" +
                                                  std::to_string(line_no) +
                                                  ": attribute text has no usable tokens");
        }
        rec.id = static_cast<NodeId>(nodes.size());
        if (!index.emplace(rec.external_id, rec.id).second) {
            raise(ErrorKind::MalformedRecord, nodes_path.string() + ":" +
                                                  std::to_string(line_no) +
                                                  ": duplicate external_id " + rec.external_id);
        }
        nodes.push_back(std::move(rec));
    }
    if (nodes.empty()) raise(ErrorKind::EmptyGraph, nodes_path.string() + " has no node records");

    std::vector<std::pair<NodeId, NodeId>> edges;
    line_no = 0;
    for (const std::string& line : read_lines(edges_path)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string_view a, b = line;
        if (!split_once(b, '\t', a, b)) {
            raise(ErrorKind::MalformedRecord, edges_path.string() + ":" +
                                                  std::to_string(line_no) +
                                                  ": expected `external_id<TAB>external_id`");
        }
        auto resolve = [&](std::string_view ext) -> NodeId {
            auto it = index.find(std::string(trim(ext)));
            if (it == index.end()) {
                raise(ErrorKind::DanglingEdge, edges_path.string() + ":" +
                                                   std::to_string(line_no) +
                                                   ": unknown node " + std::string(trim(ext)));
            }
            return it->second;
        };
        NodeId ua = resolve(a); // left endpoint reported first on error
        NodeId ub = resolve(b);
        edges.emplace_back(ua, ub);
    }

    return from_parts(std::move(nodes), edges, report);
}

AttributedGraph AttributedGraph::from_parts(std::vector<NodeRecord> nodes,
                                            const std::vector<std::pair<NodeId, NodeId>>& edges,
                                            IngestReport* report) {
    if (nodes.empty()) raise(ErrorKind::EmptyGraph, "graph has no nodes");

    AttributedGraph g;
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n; ++i) nodes[i].id = static_cast<NodeId>(i);

    IngestReport rep;
    rep.nodes = n;

    std::vector<std::vector<NodeId>> adj(n);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) raise(ErrorKind::DanglingEdge, "edge endpoint out of range");
        if (u == v) {
            ++rep.self_loops_dropped;
            continue;
        }
        adj[u].push_back(v);
        adj[v].push_back(u);
    }

    g.offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
        auto& row = adj[v];
        std::sort(row.begin(), row.end());
        std::size_t before = row.size();
        row.erase(std::unique(row.begin(), row.end()), row.end());
        rep.duplicates_collapsed += before - row.size();
        g.offsets_[v + 1] = g.offsets_[v] + row.size();
    }
    rep.duplicates_collapsed /= 2; // counted once per endpoint

    g.adjacency_.reserve(g.offsets_[n]);
    for (auto& row : adj) g.adjacency_.insert(g.adjacency_.end(), row.begin(), row.end());
    g.edge_count_ = g.adjacency_.size() / 2;
    rep.edges = g.edge_count_;

    g.external_index_.reserve(n);
    for (const auto& rec : nodes) g.external_index_.emplace(rec.external_id, rec.id);
    g.nodes_ = std::move(nodes);

    if (report) *report = rep;
    return g;
}

const NodeRecord& AttributedGraph::node(NodeId v) const {
    check_node(v);
    return nodes_[v];
}

std::span<const NodeId> AttributedGraph::neighbors(NodeId v) const {
    check_node(v);
    return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

double AttributedGraph::avg_degree() const {
    if (nodes_.empty()) return 0.0;
    return 2.0 * static_cast<double>(edge_count_) / static_cast<double>(nodes_.size());
}

bool AttributedGraph::has_edge(NodeId u, NodeId v) const {
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
}

std::optional<NodeId> AttributedGraph::find_external(std::string_view external_id) const {
    auto it = external_index_.find(std::string(external_id));
    if (it == external_index_.end()) return std::nullopt;
    return it->second;
}

NodeId AttributedGraph::require_external(std::string_view external_id) const {
    auto id = find_external(external_id);
    if (!id) raise(ErrorKind::UnknownNode, "no node with external id " + std::string(external_id));
    return *id;
}

void AttributedGraph::check_node(NodeId v) const {
    if (v >= nodes_.size()) {
        raise(ErrorKind::UnknownNode, "node " + std::to_string(v) + " out of range (N=" +
                                          std::to_string(nodes_.size()) + ")");
    }
}

namespace {

constexpr std::uint32_t kGraphMagic = 0x47534752; // "GSGR"
constexpr std::uint32_t kGraphVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) raise(ErrorKind::MalformedRecord, "truncated graph binary");
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    auto len = read_pod<std::uint64_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) raise(ErrorKind::MalformedRecord, "truncated graph binary");
    return s;
}

} // namespace

void AttributedGraph::save_binary(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::ConfigInvalid, "cannot write " + path.string());
    write_pod(out, kGraphMagic);
    write_pod(out, kGraphVersion);
    write_pod<std::uint64_t>(out, nodes_.size());
    write_pod<std::uint64_t>(out, edge_count_);
    for (const auto& rec : nodes_) {
        write_string(out, rec.external_id);
        write_string(out, rec.text);
        write_string(out, rec.label.value_or("-"));
    }
    for (std::size_t off : offsets_) write_pod<std::uint64_t>(out, off);
    out.write(reinterpret_cast<const char*>(adjacency_.data()),
              static_cast<std::streamsize>(adjacency_.size() * sizeof(NodeId)));
}

AttributedGraph AttributedGraph::load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open " + path.string());
    if (read_pod<std::uint32_t>(in) != kGraphMagic) {
        raise(ErrorKind::MalformedRecord, path.string() + " is not a graph binary");
    }
    if (read_pod<std::uint32_t>(in) != kGraphVersion) {
        raise(ErrorKind::MalformedRecord, path.string() + ": unsupported format version");
    }
    AttributedGraph g;
    auto n = read_pod<std::uint64_t>(in);
    g.edge_count_ = read_pod<std::uint64_t>(in);
    g.nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& rec = g.nodes_[i];
        rec.id = static_cast<NodeId>(i);
        rec.external_id = read_string(in);
        rec.text = read_string(in);
        std::string label = read_string(in);
        if (label != "-") rec.label = std::move(label);
        g.external_index_.emplace(rec.external_id, rec.id);
    }
    g.offsets_.resize(n + 1);
    for (auto& off : g.offsets_) off = read_pod<std::uint64_t>(in);
    g.adjacency_.resize(g.offsets_[n]);
    in.read(reinterpret_cast<char*>(g.adjacency_.data()),
            static_cast<std::streamsize>(g.adjacency_.size() * sizeof(NodeId)));
    if (!in) raise(ErrorKind::MalformedRecord, "truncated graph binary");
    return g;
}

namespace {

// BFS distances out to `max_hop`; -1 = unreached. Shared by both hop queries.
std::vector<int> bfs_distances(const GraphView& g, NodeId anchor, int max_hop) {
    g.graph().check_node(anchor);
    std::vector<int> dist(g.node_count(), -1);
    dist[anchor] = 0;
    std::deque<NodeId> frontier{anchor};
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop_front();
        if (dist[u] >= max_hop) continue;
        g.for_neighbors(u, [&](NodeId w) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                frontier.push_back(w);
            }
        });
    }
    return dist;
}

} // namespace

std::vector<NodeId> hop_neighborhood(const GraphView& g, NodeId anchor, int hops) {
    if (hops < 1) return {};
    auto dist = bfs_distances(g, anchor, hops);
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] > 0) out.push_back(static_cast<NodeId>(v));
    }
    return out;
}

std::vector<NodeId> exact_hop_ring(const GraphView& g, NodeId anchor, int hop) {
    if (hop < 1) return {};
    auto dist = bfs_distances(g, anchor, hop);
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] == hop) out.push_back(static_cast<NodeId>(v));
    }
    return out;
}

DegreeStats degree_stats(const AttributedGraph& g) {
    DegreeStats stats;
    stats.degree.resize(g.node_count());
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        stats.degree[v] = g.degree(static_cast<NodeId>(v));
    }
    stats.avg_degree = g.avg_degree();
    return stats;
}

} // namespace gs
