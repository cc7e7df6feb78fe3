#include "gs/retriever.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace gs {

const char* traversal_name(TraversalMode m) {
    return m == TraversalMode::Recursive ? "R" : "F";
}

void RetrieverConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) raise(ErrorKind::ConfigInvalid, "alpha must be in [0,1]");
    if (k < 1) raise(ErrorKind::ConfigInvalid, "k must be >= 1");
    if (hop_max != 1 && hop_max != 2) raise(ErrorKind::ConfigInvalid, "hop_max must be 1 or 2");
    if (global_pool_size < 1) raise(ErrorKind::ConfigInvalid, "global_pool_size must be >= 1");
    if (attribute_pool_size < 1)
        raise(ErrorKind::ConfigInvalid, "attribute_pool_size must be >= 1");
    if (hop_ceiling < 1) raise(ErrorKind::ConfigInvalid, "hop_ceiling must be >= 1");
    if (snippet_budget < 8) raise(ErrorKind::ConfigInvalid, "snippet_budget must be >= 8");
}

std::string RetrievalLogEntry::to_line() const {
    std::string out = "anchor=" + anchor_external + " scope=" + scope +
                      " hop=" + (hop > 0 ? std::to_string(hop) : "-");
    char buf[64];
    std::snprintf(buf, sizeof(buf), " alpha=%g k=%d", alpha, k);
    out += buf;
    std::snprintf(buf, sizeof(buf), " candidates=%zu scored=%zu micros=%llu fallback=%d",
                  candidate_count, scored_count, static_cast<unsigned long long>(micros),
                  fallback ? 1 : 0);
    out += buf;
    out += " returned=";
    for (std::size_t i = 0; i < returned.size(); ++i) {
        if (i > 0) out += ";";
        std::snprintf(buf, sizeof(buf), ":%.6f", returned[i].second);
        out += returned[i].first;
        out += buf;
    }
    return out;
}

Retriever::Retriever(const AttributedGraph& g, const EmbeddingTable& embeddings, PprCache& ppr,
                     RetrieverConfig cfg, PprConfig ppr_cfg)
    : graph_(&g), embeddings_(&embeddings), ppr_(&ppr), cfg_(cfg), ppr_cfg_(ppr_cfg) {
    cfg_.validate();
    ppr_cfg_.pool_size = cfg_.global_pool_size;
}

NodeId Retriever::effective_anchor(std::span<const NodeId> anchors,
                                   const StructuredQuery& q) const {
    if (anchors.empty()) raise(ErrorKind::UnknownNode, "no anchor provided");
    if (q.anchor == AnchorSelector::Second && anchors.size() > 1) return anchors[1];
    return anchors[0];
}

std::vector<NodeId> Retriever::attribute_pool(NodeId anchor,
                                              std::span<const NodeId> anchors) const {
    // Exhaustive scan over the corpus by anchor-attribute similarity.
    std::vector<RankedEntry> scored;
    scored.reserve(graph_->node_count());
    double anchor_norm = embeddings_->norm(anchor);
    auto anchor_row = embeddings_->row(anchor);
    for (std::size_t v = 0; v < graph_->node_count(); ++v) {
        NodeId id = static_cast<NodeId>(v);
        if (std::find(anchors.begin(), anchors.end(), id) != anchors.end()) continue;
        scored.push_back({id, embeddings_->cosine_row_query(id, anchor_row, anchor_norm)});
    }
    std::size_t take = std::min<std::size_t>(scored.size(), cfg_.attribute_pool_size);
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                      [](const RankedEntry& a, const RankedEntry& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.id < b.id;
                      });
    std::vector<NodeId> pool;
    pool.reserve(take);
    for (std::size_t i = 0; i < take; ++i) pool.push_back(scored[i].id);
    return pool;
}

CandidateSet Retriever::build_candidates(const GraphView& view, std::span<const NodeId> anchors,
                                         const StructuredQuery& q, TraversalState& state) const {
    NodeId anchor = effective_anchor(anchors, q);
    graph_->check_node(anchor);

    auto excluded = [&](NodeId v) {
        if (std::find(anchors.begin(), anchors.end(), v) != anchors.end()) return true;
        return state.returned.count(v) > 0;
    };

    CandidateSet out;
    auto add_pool = [&](const std::vector<NodeId>& pool, std::uint8_t flag) {
        for (NodeId v : pool) {
            if (excluded(v)) continue;
            auto it = std::lower_bound(out.members.begin(), out.members.end(), v);
            if (it != out.members.end() && *it == v) {
                out.provenance[static_cast<std::size_t>(it - out.members.begin())] |= flag;
            } else {
                std::size_t at = static_cast<std::size_t>(it - out.members.begin());
                out.members.insert(it, v);
                out.provenance.insert(out.provenance.begin() + at, flag);
            }
        }
        out.scope_used |= flag;
    };

    if (state.mode == TraversalMode::Recursive) {
        // Ring at the current hop; sparse rings are topped up from the
        // global pool until k candidates are available or the pool runs out.
        int hop = std::min(state.current_hop, cfg_.hop_ceiling);
        out.hop_used = hop;
        add_pool(exact_hop_ring(view, anchor, hop), kPoolLocal);
        if (out.members.size() < static_cast<std::size_t>(cfg_.k)) {
            out.fallback_used = true;
            for (NodeId v : ppr_->top_m(view, anchor, ppr_cfg_)) {
                if (out.members.size() >= static_cast<std::size_t>(cfg_.k)) break;
                if (excluded(v)) continue;
                auto it = std::lower_bound(out.members.begin(), out.members.end(), v);
                if (it != out.members.end() && *it == v) continue;
                std::size_t at = static_cast<std::size_t>(it - out.members.begin());
                out.members.insert(it, v);
                out.provenance.insert(out.provenance.begin() + at, kPoolGlobal);
                out.scope_used |= kPoolGlobal;
            }
        }
        return out;
    }

    std::uint8_t mask = cfg_.scope_union_mask;
    if (mask == 0) {
        switch (q.scope.kind) {
        case ScopeKind::Local: mask = kPoolLocal; break;
        case ScopeKind::Global: mask = kPoolGlobal; break;
        case ScopeKind::Attribute: mask = kPoolAttribute; break;
        }
    }
    if (mask & kPoolLocal) {
        int hop = std::min(q.scope.kind == ScopeKind::Local ? q.scope.hop : 1, cfg_.hop_max);
        out.hop_used = hop;
        add_pool(hop_neighborhood(view, anchor, hop), kPoolLocal);
    }
    if (mask & kPoolGlobal) add_pool(ppr_->top_m(view, anchor, ppr_cfg_), kPoolGlobal);
    if (mask & kPoolAttribute) add_pool(attribute_pool(anchor, anchors), kPoolAttribute);
    return out;
}

namespace {

// The hybrid score degenerates exactly at the extremes: the inactive side is
// never computed, so it cannot perturb the value.
double hybrid_score(const EmbeddingTable& emb, NodeId v, NodeId anchor, double alpha,
                    const Vector* query_vec, double query_norm) {
    double score = 0.0;
    if (alpha > 0.0) score += alpha * emb.cosine_rows(v, anchor);
    if (alpha < 1.0) {
        if (!query_vec) raise(ErrorKind::EmptyQueryText, "alpha < 1 requires query text");
        score += (1.0 - alpha) * emb.cosine_row_query(v, query_vec->values, query_norm);
    }
    return score;
}

} // namespace

double Retriever::score_candidate(NodeId v, NodeId anchor, const Vector* query_vec,
                                  double query_norm) const {
    return hybrid_score(*embeddings_, v, anchor, cfg_.alpha, query_vec, query_norm);
}

RankedResult Retriever::rank(const GraphView&, const CandidateSet& candidates, NodeId anchor,
                             const StructuredQuery& q, TraversalState& state, double forced_alpha,
                             RetrievalLogEntry* log, std::uint64_t build_us) const {
    auto t0 = std::chrono::steady_clock::now();

    double alpha = forced_alpha;
    std::optional<Vector> query_vec;
    double query_norm = 0.0;
    if (alpha < 1.0) {
        Encoder enc(embeddings_->dim());
        if (embeddings_->encoder_kind() != EncoderKind::HashedBow) {
            raise(ErrorKind::ConfigInvalid,
                  "alpha < 1 needs the builtin encoder; precomputed node vectors "
                  "provide no query encoder");
        }
        try {
            query_vec = enc.encode(q.text);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::EmptyText) {
                raise(ErrorKind::EmptyQueryText, "query text has no usable tokens");
            }
            throw;
        }
        query_norm = norm_striped(query_vec->values);
    }

    RankedResult result;
    result.k_requested = cfg_.k;
    result.scored_count = candidates.members.size();
    std::vector<RankedEntry> scored;
    scored.reserve(candidates.members.size());
    const Vector* qv = query_vec ? &*query_vec : nullptr;
    for (NodeId v : candidates.members) {
        scored.push_back({v, hybrid_score(*embeddings_, v, anchor, alpha, qv, query_norm)});
    }
    std::size_t take = std::min<std::size_t>(scored.size(), cfg_.k);
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                      [](const RankedEntry& a, const RankedEntry& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.id < b.id;
                      });
    scored.resize(take);
    result.entries = std::move(scored);
    result.k_returned = static_cast<int>(take);

    for (const auto& e : result.entries) state.returned.insert(e.id);

    auto t1 = std::chrono::steady_clock::now();
    if (log) {
        log->anchor_external = graph_->node(anchor).external_id;
        log->hop = candidates.hop_used;
        log->alpha = alpha;
        log->k = cfg_.k;
        log->candidate_count = candidates.members.size();
        log->scored_count = result.scored_count;
        log->fallback = candidates.fallback_used;
        log->micros =
            build_us + static_cast<std::uint64_t>(
                           std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count());
        for (const auto& e : result.entries) {
            log->returned.emplace_back(graph_->node(e.id).external_id, e.score);
        }
    }
    return result;
}

RankedResult Retriever::retrieve(const GraphView& view, std::span<const NodeId> anchors,
                                 const StructuredQuery& q, TraversalState& state,
                                 RetrievalLogEntry* log) const {
    auto t0 = std::chrono::steady_clock::now();
    CandidateSet candidates = build_candidates(view, anchors, q, state);
    auto t1 = std::chrono::steady_clock::now();
    auto build_us = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count());

    NodeId anchor = effective_anchor(anchors, q);
    if (log) {
        if (state.mode == TraversalMode::Recursive) {
            log->scope = "ring";
        } else if (candidates.scope_used & kPoolAttribute) {
            log->scope = "attribute";
        } else if (candidates.scope_used & kPoolGlobal) {
            log->scope = "global";
        } else {
            log->scope = "local";
        }
    }
    return rank(view, candidates, anchor, q, state, cfg_.alpha, log, build_us);
}

RankedResult Retriever::retrieve_full_corpus(const GraphView& view,
                                             std::span<const NodeId> anchors,
                                             const StructuredQuery& q, TraversalState& state,
                                             RetrievalLogEntry* log) const {
    auto t0 = std::chrono::steady_clock::now();
    CandidateSet candidates;
    candidates.members.reserve(graph_->node_count());
    for (std::size_t v = 0; v < graph_->node_count(); ++v) {
        NodeId id = static_cast<NodeId>(v);
        if (std::find(anchors.begin(), anchors.end(), id) != anchors.end()) continue;
        if (state.returned.count(id)) continue;
        candidates.members.push_back(id);
    }
    candidates.provenance.assign(candidates.members.size(), 0);
    auto t1 = std::chrono::steady_clock::now();
    auto build_us = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count());

    NodeId anchor = effective_anchor(anchors, q);
    if (log) log->scope = "corpus";
    return rank(view, candidates, anchor, q, state, 0.0, log, build_us);
}

std::string Retriever::format_information(const RankedResult& result) const {
    if (result.entries.empty()) return "No relevant nodes found.";
    std::string out;
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        const std::string& text = graph_->node(result.entries[i].id).text;
        out += std::to_string(i + 1) + ". ";
        if (text.size() > cfg_.snippet_budget) {
            std::size_t cut = cfg_.snippet_budget;
            // never split a UTF-8 sequence
            while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
            out.append(text, 0, cut);
            out += "...";
        } else {
            out += text;
        }
        out += "\n";
    }
    if (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

} // namespace gs
