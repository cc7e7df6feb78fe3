#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "gs/graph.hpp"

namespace gs {

struct Vector {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
};

enum class EncoderKind { HashedBow, Precomputed };

struct EncoderConfig {
    EncoderKind kind = EncoderKind::HashedBow;
    std::size_t dim = 256;
    std::filesystem::path vectors_path; // Precomputed only
};

// All similarity arithmetic in the engine uses this fixed reduction: four
// double accumulators striped over indices i % 4, combined as
// (s0+s1)+(s2+s3). Pinning the order makes scores reproducible bit-for-bit
// across the scorer, the persisted tables, and reference reimplementations.
double dot_striped(std::span<const float> a, std::span<const float> b);
double norm_striped(std::span<const float> a);

double cos_sim(const Vector& a, const Vector& b);

// Deterministic hashed bag-of-words encoder: token -> fnv1a64(token) % dim,
// term-frequency weights, L2-normalized.
class Encoder {
public:
    explicit Encoder(std::size_t dim = 256) : dim_(dim) {}

    Vector encode(std::string_view text) const;
    std::size_t dim() const { return dim_; }

private:
    std::size_t dim_;
};

// One vector per NodeId plus the precomputed norms used by the ranking path.
class EmbeddingTable {
public:
    static EmbeddingTable build(const EncoderConfig& cfg, const AttributedGraph& g);
    static EmbeddingTable load(const std::filesystem::path& dir);
    void save(const std::filesystem::path& dir) const;

    std::span<const float> row(NodeId v) const;
    double norm(NodeId v) const;
    double cosine_rows(NodeId a, NodeId b) const;
    double cosine_row_query(NodeId v, std::span<const float> query, double query_norm) const;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return count_; }
    EncoderKind encoder_kind() const { return kind_; }

private:
    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    EncoderKind kind_ = EncoderKind::HashedBow;
    std::vector<float> data_;   // count_ x dim_, row-major
    std::vector<double> norms_; // norm_striped of each row

    void compute_norms();
};

} // namespace gs
