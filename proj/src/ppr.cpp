#include "gs/ppr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gs/text.hpp"

namespace gs {

std::uint64_t PprConfig::hash() const {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "d=%.17g;tol=%.17g;iters=%d;m=%d", damping, tolerance,
                  max_iterations, pool_size);
    return fnv1a64(buf);
}

PprScores personalized_pagerank(const GraphView& g, NodeId anchor, const PprConfig& cfg) {
    g.graph().check_node(anchor);
    const std::size_t n = g.node_count();
    const double d = cfg.damping;

    std::vector<double> p(n, 0.0), next(n, 0.0);
    p[anchor] = 1.0;

    PprScores out;
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double dangling = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            if (p[u] == 0.0) continue;
            std::size_t deg = g.degree(static_cast<NodeId>(u));
            if (deg == 0) {
                dangling += p[u];
                continue;
            }
            double w = p[u] / static_cast<double>(deg);
            g.for_neighbors(static_cast<NodeId>(u), [&](NodeId v) { next[v] += w; });
        }
        next[anchor] += dangling;
        for (std::size_t v = 0; v < n; ++v) next[v] *= d;
        next[anchor] += 1.0 - d;

        double residual = 0.0;
        for (std::size_t v = 0; v < n; ++v) residual += std::abs(next[v] - p[v]);
        p.swap(next);
        out.iterations_used = iter;
        if (residual < cfg.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.score = std::move(p);
    return out;
}

std::vector<NodeId> global_neighbor_set(const PprScores& scores, NodeId anchor, int m) {
    std::vector<NodeId> ids;
    ids.reserve(scores.score.size());
    for (std::size_t v = 0; v < scores.score.size(); ++v) {
        if (v != anchor && scores.score[v] > 0.0) ids.push_back(static_cast<NodeId>(v));
    }
    std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
        if (scores.score[a] != scores.score[b]) return scores.score[a] > scores.score[b];
        return a < b;
    });
    if (m >= 0 && ids.size() > static_cast<std::size_t>(m)) ids.resize(static_cast<std::size_t>(m));
    return ids;
}

PprCache::PprCache(std::filesystem::path dir, const AttributedGraph& g)
    : dir_(std::move(dir)), graph_(&g) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::filesystem::path PprCache::entry_path(NodeId anchor, const PprConfig& cfg) const {
    char name[64];
    std::snprintf(name, sizeof(name), "%u-%016llx.txt", anchor,
                  static_cast<unsigned long long>(cfg.hash()));
    return dir_ / name;
}

std::vector<NodeId> PprCache::top_m(const GraphView& g, NodeId anchor, const PprConfig& cfg) {
    if (g.masked()) {
        // Not cacheable: the pool depends on the hidden edge.
        auto scores = personalized_pagerank(g, anchor, cfg);
        return global_neighbor_set(scores, anchor, cfg.pool_size);
    }

    std::uint64_t key = (static_cast<std::uint64_t>(anchor) << 32) ^ cfg.hash();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
    }

    std::vector<NodeId> pool;
    auto path = entry_path(anchor, cfg);
    if (dir_.empty() || !read_entry(path, pool)) {
        auto scores = personalized_pagerank(g, anchor, cfg);
        pool = global_neighbor_set(scores, anchor, cfg.pool_size);
        if (!dir_.empty()) write_entry(path, anchor, cfg, pool, scores);
    }

    std::lock_guard<std::mutex> lock(mutex_);
    memo_.emplace(key, pool);
    return pool;
}

bool PprCache::read_entry(const std::filesystem::path& path, std::vector<NodeId>& out) const {
    std::ifstream in(path);
    if (!in) return false;
    std::string header;
    if (!std::getline(in, header) || header.rfind("anchor=", 0) != 0) return false;
    out.clear();
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::string_view ext, score = line;
        if (!split_once(score, '\t', ext, score)) return false;
        auto id = graph_->find_external(trim(ext));
        if (!id) return false;
        out.push_back(*id);
    }
    return true;
}

void PprCache::write_entry(const std::filesystem::path& path, NodeId anchor, const PprConfig& cfg,
                           const std::vector<NodeId>& pool, const PprScores& scores) const {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream outf(tmp, std::ios::trunc);
        if (!outf) return; // cache is best-effort
        char header[96];
        std::snprintf(header, sizeof(header), "anchor=%s config=%016llx m=%zu",
                      graph_->node(anchor).external_id.c_str(),
                      static_cast<unsigned long long>(cfg.hash()), pool.size());
        outf << header << "\n";
        for (NodeId v : pool) {
            char score[40];
            std::snprintf(score, sizeof(score), "%.12g", scores.score[v]);
            outf << graph_->node(v).external_id << "\t" << score << "\n";
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
}

} // namespace gs
