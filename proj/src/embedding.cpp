#include "gs/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gs/text.hpp"

namespace gs {

double dot_striped(std::span<const float> a, std::span<const float> b) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t i = 0;
    const std::size_t n = a.size();
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        s1 += static_cast<double>(a[i + 1]) * static_cast<double>(b[i + 1]);
        s2 += static_cast<double>(a[i + 2]) * static_cast<double>(b[i + 2]);
        s3 += static_cast<double>(a[i + 3]) * static_cast<double>(b[i + 3]);
    }
    for (; i < n; ++i) {
        switch (i % 4) {
        case 0: s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]); break;
        case 1: s1 += static_cast<double>(a[i]) * static_cast<double>(b[i]); break;
        case 2: s2 += static_cast<double>(a[i]) * static_cast<double>(b[i]); break;
        default: s3 += static_cast<double>(a[i]) * static_cast<double>(b[i]); break;
        }
    }
    return (s0 + s1) + (s2 + s3);
}

double norm_striped(std::span<const float> a) {
    return std::sqrt(dot_striped(a, a));
}

double cos_sim(const Vector& a, const Vector& b) {
    if (a.dim() != b.dim()) {
        raise(ErrorKind::DimensionMismatch, "cosine over dims " + std::to_string(a.dim()) +
                                                " and " + std::to_string(b.dim()));
    }
    double na = norm_striped(a.values);
    double nb = norm_striped(b.values);
    if (na == 0.0 || nb == 0.0) raise(ErrorKind::ZeroVector, "cosine with a zero vector");
    return dot_striped(a.values, b.values) / (na * nb);
}

Vector Encoder::encode(std::string_view text) const {
    auto tokens = tokenize_text(text);
    if (tokens.empty()) raise(ErrorKind::EmptyText, "text has no usable tokens");
    Vector v;
    v.values.assign(dim_, 0.0f);
    for (const auto& tok : tokens) {
        v.values[fnv1a64(tok) % dim_] += 1.0f;
    }
    double norm = norm_striped(v.values);
    for (float& x : v.values) x = static_cast<float>(x / norm);
    return v;
}

namespace {

constexpr int kManifestVersion = 1;

const char* kind_name(EncoderKind k) {
    return k == EncoderKind::HashedBow ? "hashed-bow" : "precomputed";
}

EncoderKind kind_from_name(const std::string& s) {
    if (s == "hashed-bow") return EncoderKind::HashedBow;
    if (s == "precomputed") return EncoderKind::Precomputed;
    raise(ErrorKind::ConfigInvalid, "unknown encoder kind " + s);
}

std::uint64_t content_hash(const std::vector<float>& data) {
    return fnv1a64({reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float)});
}

} // namespace

EmbeddingTable EmbeddingTable::build(const EncoderConfig& cfg, const AttributedGraph& g) {
    EmbeddingTable table;
    table.kind_ = cfg.kind;
    table.count_ = g.node_count();

    if (cfg.kind == EncoderKind::HashedBow) {
        table.dim_ = cfg.dim;
        table.data_.resize(table.count_ * table.dim_);
        Encoder enc(cfg.dim);
        for (std::size_t v = 0; v < table.count_; ++v) {
            Vector vec = enc.encode(g.node(static_cast<NodeId>(v)).text);
            std::copy(vec.values.begin(), vec.values.end(), table.data_.begin() + v * table.dim_);
        }
        table.compute_norms();
        return table;
    }

    // Precomputed: header `dim=<D>`, then `external_id <TAB> v1,v2,...,vD`.
    std::ifstream in(cfg.vectors_path);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open " + cfg.vectors_path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("dim=", 0) != 0) {
        raise(ErrorKind::MalformedRecord, cfg.vectors_path.string() + ": missing `dim=` header");
    }
    table.dim_ = static_cast<std::size_t>(std::stoul(line.substr(4)));
    if (table.dim_ == 0) raise(ErrorKind::MalformedRecord, "dim must be positive");
    table.data_.assign(table.count_ * table.dim_, 0.0f);
    std::vector<bool> seen(table.count_, false);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string_view ext, values = line;
        if (!split_once(values, '\t', ext, values)) {
            raise(ErrorKind::MalformedRecord, cfg.vectors_path.string() + ":" +
                                                  std::to_string(line_no) + ": expected TAB");
        }
        auto id = g.find_external(trim(ext));
        if (!id) continue; // vectors for unknown nodes are ignored
        float* row = table.data_.data() + *id * table.dim_;
        std::stringstream ss{std::string(values)};
        std::string cell;
        std::size_t i = 0;
        while (std::getline(ss, cell, ',')) {
            if (i >= table.dim_) break;
            row[i++] = std::stof(cell);
        }
        if (i != table.dim_) {
            raise(ErrorKind::MalformedRecord, cfg.vectors_path.string() + ":" +
                                                  std::to_string(line_no) + ": expected " +
                                                  std::to_string(table.dim_) + " values");
        }
        seen[*id] = true;
    }
    for (std::size_t v = 0; v < table.count_; ++v) {
        if (!seen[v]) {
            raise(ErrorKind::MissingVector, "no vector for node " +
                                                g.node(static_cast<NodeId>(v)).external_id);
        }
    }
    table.compute_norms();
    return table;
}

void EmbeddingTable::compute_norms() {
    norms_.resize(count_);
    for (std::size_t v = 0; v < count_; ++v) {
        norms_[v] = norm_striped(row(static_cast<NodeId>(v)));
    }
}

std::span<const float> EmbeddingTable::row(NodeId v) const {
    if (v >= count_) raise(ErrorKind::MissingVector, "no vector for node " + std::to_string(v));
    return {data_.data() + static_cast<std::size_t>(v) * dim_, dim_};
}

double EmbeddingTable::norm(NodeId v) const {
    if (v >= count_) raise(ErrorKind::MissingVector, "no vector for node " + std::to_string(v));
    return norms_[v];
}

double EmbeddingTable::cosine_rows(NodeId a, NodeId b) const {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) raise(ErrorKind::ZeroVector, "cosine with a zero node vector");
    return dot_striped(row(a), row(b)) / (na * nb);
}

double EmbeddingTable::cosine_row_query(NodeId v, std::span<const float> query,
                                        double query_norm) const {
    double nv = norm(v);
    if (nv == 0.0 || query_norm == 0.0) raise(ErrorKind::ZeroVector, "cosine with a zero vector");
    return dot_striped(row(v), query) / (nv * query_norm);
}

void EmbeddingTable::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream bin(dir / "embeddings.bin", std::ios::binary | std::ios::trunc);
    if (!bin) raise(ErrorKind::ConfigInvalid, "cannot write " + (dir / "embeddings.bin").string());
    bin.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size() * sizeof(float)));
    bin.close();

    nlohmann::json manifest{
        {"format_version", kManifestVersion},
        {"dim", dim_},
        {"count", count_},
        {"encoder", kind_name(kind_)},
        {"content_hash", content_hash(data_)},
    };
    std::ofstream mf(dir / "embeddings.manifest.json", std::ios::trunc);
    mf << manifest.dump(2) << "\n";
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "embeddings.manifest.json");
    if (!mf) {
        raise(ErrorKind::ConfigInvalid,
              "missing manifest " + (dir / "embeddings.manifest.json").string());
    }
    nlohmann::json manifest = nlohmann::json::parse(mf);
    if (manifest.at("format_version").get<int>() != kManifestVersion) {
        raise(ErrorKind::ConfigInvalid, "unsupported embeddings format version");
    }
    EmbeddingTable table;
    table.dim_ = manifest.at("dim").get<std::size_t>();
    table.count_ = manifest.at("count").get<std::size_t>();
    table.kind_ = kind_from_name(manifest.at("encoder").get<std::string>());
    table.data_.resize(table.count_ * table.dim_);

    std::ifstream bin(dir / "embeddings.bin", std::ios::binary);
    if (!bin) raise(ErrorKind::ConfigInvalid, "cannot open " + (dir / "embeddings.bin").string());
    bin.read(reinterpret_cast<char*>(table.data_.data()),
             static_cast<std::streamsize>(table.data_.size() * sizeof(float)));
    if (!bin) raise(ErrorKind::MalformedRecord, "truncated embeddings.bin");
    if (content_hash(table.data_) != manifest.at("content_hash").get<std::uint64_t>()) {
        raise(ErrorKind::MalformedRecord, "embeddings.bin does not match manifest hash");
    }
    table.compute_norms();
    return table;
}

} // namespace gs
