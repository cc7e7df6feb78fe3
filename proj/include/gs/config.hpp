#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gs/retriever.hpp"
#include "gs/rollout.hpp"
#include "gs/tasks.hpp"

namespace gs {

// Flat `key = value` run configuration. Command-line flags override file
// values; unset fields take the documented defaults.
struct RunConfig {
    // paths
    std::filesystem::path nodes_path;
    std::filesystem::path edges_path;
    std::filesystem::path index_dir;
    std::filesystem::path templates_dir;
    std::filesystem::path instances_path;
    std::filesystem::path script_path;
    std::filesystem::path vectors_path; // precomputed embeddings
    std::filesystem::path out_dir;

    // retriever
    std::optional<double> alpha; // default depends on traversal mode
    int k = 3;
    int hop_max = 2;
    int global_pool_size = 50;
    int attribute_pool_size = 50;
    int snippet_budget = 600;
    bool three_mode = false;

    // rollout
    TraversalMode traversal = TraversalMode::Flex;
    int max_search_steps = 8;
    double temperature = 0.7;
    int max_tokens = 8192;

    // backend + eval
    std::string backend = "scripted"; // scripted | remote
    std::string eval_mode = "graph";  // graph | agnostic
    int in_flight = 8;
    std::uint64_t seed = 0;
    std::size_t embedding_dim = 256;

    // prompt context
    std::string domain = "generic";
    std::string entity = "node";
    std::string relation = "edges";
    std::vector<std::string> class_list; // empty = derive from graph labels

    static RunConfig load(const std::filesystem::path& path);
    void apply_override(const std::string& key, const std::string& value);
    void validate() const;

    double effective_alpha() const {
        return alpha.value_or(traversal == TraversalMode::Recursive ? 1.0 : 0.5);
    }
    RetrieverConfig retriever_config() const;
    RolloutConfig rollout_config() const;
    BaselineMode baseline_mode() const;
};

} // namespace gs
