#include "gs/synthetic.hpp"

#include <algorithm>
#include <unordered_set>

#include "gs/text.hpp"

namespace gs {

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) return 0;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

namespace {

std::string pseudo_text(std::uint64_t seed, std::size_t node, std::size_t tokens,
                        std::size_t vocab) {
    std::string text;
    for (std::size_t j = 0; j < tokens; ++j) {
        std::uint64_t h = fnv1a64(std::to_string(seed) + ":" + std::to_string(node) + ":" +
                                  std::to_string(j));
        if (j > 0) text += " ";
        text += "tok" + std::to_string(h % vocab);
    }
    return text;
}

} // namespace

AttributedGraph make_synthetic_graph(std::size_t n, double avg_degree, std::uint64_t seed) {
    if (n == 0) raise(ErrorKind::EmptyGraph, "synthetic graph needs at least one node");
    std::vector<NodeRecord> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i].external_id = "n" + std::to_string(i);
        nodes[i].text = pseudo_text(seed, i, 8, 4096);
    }

    std::mt19937_64 rng(seed);
    auto target = static_cast<std::size_t>(static_cast<double>(n) * avg_degree / 2.0);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(target * 2);
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(target);
    std::size_t attempts = 0;
    const std::size_t max_attempts = target * 20 + 100;
    while (edges.size() < target && attempts++ < max_attempts) {
        auto u = static_cast<NodeId>(uniform_below(rng, n));
        auto v = static_cast<NodeId>(uniform_below(rng, n));
        if (u == v) continue;
        std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
        if (!seen.insert(key).second) continue;
        edges.emplace_back(u, v);
    }
    return AttributedGraph::from_parts(std::move(nodes), edges);
}

PlantedPartition make_planted_partition(std::size_t n, int classes, double homophily,
                                        double avg_degree, std::uint64_t seed) {
    if (classes < 2) raise(ErrorKind::ConfigInvalid, "need at least two classes");
    if (n < static_cast<std::size_t>(classes)) {
        raise(ErrorKind::ConfigInvalid, "need at least one node per class");
    }

    PlantedPartition out;
    for (int c = 0; c < classes; ++c) {
        out.class_names.push_back("class" + std::string(1, static_cast<char>('A' + c)));
        out.marker_tokens.push_back("marker" + std::to_string(c));
    }

    std::mt19937_64 rng(seed);
    const std::size_t block = n / classes;
    out.node_class.resize(n);
    std::vector<std::vector<NodeId>> by_class(classes);
    for (std::size_t i = 0; i < n; ++i) {
        int c = std::min<int>(static_cast<int>(i / block), classes - 1);
        out.node_class[i] = c;
        by_class[c].push_back(static_cast<NodeId>(i));
    }

    constexpr std::size_t kFillerTokens = 11;
    constexpr std::size_t kVocab = 40;
    std::vector<NodeRecord> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i].external_id = "p" + std::to_string(i);
        nodes[i].label = out.class_names[out.node_class[i]];
        std::vector<std::string> tokens;
        for (std::size_t j = 0; j < kFillerTokens; ++j) {
            tokens.push_back("w" + std::to_string(uniform_below(rng, kVocab)));
        }
        std::size_t marker_at = uniform_below(rng, tokens.size() + 1);
        tokens.insert(tokens.begin() + marker_at, out.marker_tokens[out.node_class[i]]);
        std::string text;
        for (std::size_t j = 0; j < tokens.size(); ++j) {
            if (j > 0) text += " ";
            text += tokens[j];
        }
        nodes[i].text = text;
    }

    auto target = static_cast<std::size_t>(static_cast<double>(n) * avg_degree / 2.0);
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::size_t attempts = 0;
    const std::size_t max_attempts = target * 50 + 100;
    while (edges.size() < target && attempts++ < max_attempts) {
        auto u = static_cast<NodeId>(uniform_below(rng, n));
        int cu = out.node_class[u];
        bool same = static_cast<double>(uniform_below(rng, 1u << 20)) <
                    homophily * static_cast<double>(1u << 20);
        NodeId v;
        if (same) {
            const auto& pool = by_class[cu];
            v = pool[uniform_below(rng, pool.size())];
        } else {
            v = static_cast<NodeId>(uniform_below(rng, n));
            if (out.node_class[v] == cu) continue;
        }
        if (u == v) continue;
        std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
        if (!seen.insert(key).second) continue;
        edges.emplace_back(u, v);
    }

    // connect any isolated node to a same-class neighbor so every anchor has
    // at least one ring
    {
        std::vector<std::size_t> deg(n, 0);
        for (auto [u, v] : edges) {
            ++deg[u];
            ++deg[v];
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (deg[i] > 0) continue;
            const auto& pool = by_class[out.node_class[i]];
            if (pool.size() < 2) continue;
            NodeId v;
            do {
                v = pool[uniform_below(rng, pool.size())];
            } while (v == i);
            edges.emplace_back(static_cast<NodeId>(i), v);
        }
    }

    out.graph = AttributedGraph::from_parts(std::move(nodes), edges);
    return out;
}

} // namespace gs
