#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gs/graph.hpp"

namespace gs {

// Bounded uniform draw by rejection, so sampled artifacts are identical on
// every platform for a given seed (uniform_int_distribution is not portable).
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// Random graph with ~n*avg_degree/2 distinct edges and hashed pseudo-text
// attributes. Deterministic under seed; no dataset download required.
AttributedGraph make_synthetic_graph(std::size_t n, double avg_degree, std::uint64_t seed);

struct PlantedPartition {
    AttributedGraph graph;
    std::vector<std::string> class_names;
    std::vector<int> node_class;
    // Marker tokens correlate with classes in the attribute text; labels
    // themselves never appear in any text.
    std::vector<std::string> marker_tokens;
};

// Planted-partition graph: `classes` equal blocks, each edge endpoint pair
// drawn same-class with probability `homophily`. Node text is filler tokens
// from a small shared vocabulary plus one class-marker token, so attribute
// similarity alone is a weak signal while the topology is a strong one.
PlantedPartition make_planted_partition(std::size_t n, int classes, double homophily,
                                        double avg_degree, std::uint64_t seed);

} // namespace gs
