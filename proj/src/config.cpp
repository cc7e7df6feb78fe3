#include "gs/config.hpp"

#include <fstream>

#include "gs/text.hpp"

namespace gs {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double d = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return d;
    } catch (const std::exception&) {
        raise(ErrorKind::ConfigInvalid, key + ": not a number: " + value);
    }
}

long long parse_integer(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long long i = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return i;
    } catch (const std::exception&) {
        raise(ErrorKind::ConfigInvalid, key + ": not an integer: " + value);
    }
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> out;
    std::string_view rest = value;
    while (!rest.empty()) {
        std::string_view item = rest;
        std::size_t pos = rest.find(';');
        if (pos == std::string_view::npos) {
            rest = {};
        } else {
            item = rest.substr(0, pos);
            rest = rest.substr(pos + 1);
        }
        auto t = trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

} // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ConfigInvalid, "cannot open config " + path.string());
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        std::string_view key, value;
        if (!split_once(body, '=', key, value)) {
            raise(ErrorKind::ConfigInvalid,
                  path.string() + ":" + std::to_string(line_no) + ": expected `key = value`");
        }
        cfg.apply_override(std::string(trim(key)), std::string(trim(value)));
    }
    return cfg;
}

void RunConfig::apply_override(const std::string& key, const std::string& value) {
    if (key == "nodes") nodes_path = value;
    else if (key == "edges") edges_path = value;
    else if (key == "index") index_dir = value;
    else if (key == "templates") templates_dir = value;
    else if (key == "instances") instances_path = value;
    else if (key == "script") script_path = value;
    else if (key == "vectors") vectors_path = value;
    else if (key == "out") out_dir = value;
    else if (key == "alpha") alpha = parse_double(key, value);
    else if (key == "k") k = static_cast<int>(parse_integer(key, value));
    else if (key == "hop_max") hop_max = static_cast<int>(parse_integer(key, value));
    else if (key == "global_pool_size")
        global_pool_size = static_cast<int>(parse_integer(key, value));
    else if (key == "attribute_pool_size")
        attribute_pool_size = static_cast<int>(parse_integer(key, value));
    else if (key == "snippet_budget") snippet_budget = static_cast<int>(parse_integer(key, value));
    else if (key == "three_mode") three_mode = value == "1" || value == "true";
    else if (key == "traversal") {
        if (value == "R" || value == "r") traversal = TraversalMode::Recursive;
        else if (value == "F" || value == "f") traversal = TraversalMode::Flex;
        else raise(ErrorKind::ConfigInvalid, "traversal: must be R or F, got " + value);
    } else if (key == "max_search_steps")
        max_search_steps = static_cast<int>(parse_integer(key, value));
    else if (key == "temperature") temperature = parse_double(key, value);
    else if (key == "max_tokens") max_tokens = static_cast<int>(parse_integer(key, value));
    else if (key == "backend") {
        if (value != "scripted" && value != "remote") {
            raise(ErrorKind::ConfigInvalid, "backend: must be scripted or remote, got " + value);
        }
        backend = value;
    } else if (key == "mode") {
        if (value != "graph" && value != "agnostic") {
            raise(ErrorKind::ConfigInvalid, "mode: must be graph or agnostic, got " + value);
        }
        eval_mode = value;
    } else if (key == "in_flight") in_flight = static_cast<int>(parse_integer(key, value));
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_integer(key, value));
    else if (key == "embedding_dim")
        embedding_dim = static_cast<std::size_t>(parse_integer(key, value));
    else if (key == "domain") domain = value;
    else if (key == "entity") entity = value;
    else if (key == "relation") relation = value;
    else if (key == "classes") class_list = parse_list(value);
    else raise(ErrorKind::ConfigInvalid, "unknown config key: " + key);
}

void RunConfig::validate() const {
    if (alpha && (*alpha < 0.0 || *alpha > 1.0)) {
        raise(ErrorKind::ConfigInvalid, "alpha: must be in [0,1], got " + std::to_string(*alpha));
    }
    if (k < 1) raise(ErrorKind::ConfigInvalid, "k: must be >= 1");
    if (hop_max != 1 && hop_max != 2) raise(ErrorKind::ConfigInvalid, "hop_max: must be 1 or 2");
    if (global_pool_size < 1) raise(ErrorKind::ConfigInvalid, "global_pool_size: must be >= 1");
    if (attribute_pool_size < 1)
        raise(ErrorKind::ConfigInvalid, "attribute_pool_size: must be >= 1");
    if (snippet_budget < 8) raise(ErrorKind::ConfigInvalid, "snippet_budget: must be >= 8");
    if (max_search_steps < 1) raise(ErrorKind::ConfigInvalid, "max_search_steps: must be >= 1");
    if (temperature < 0.0) raise(ErrorKind::ConfigInvalid, "temperature: must be >= 0");
    if (max_tokens < 1) raise(ErrorKind::ConfigInvalid, "max_tokens: must be >= 1");
    if (in_flight < 1) raise(ErrorKind::ConfigInvalid, "in_flight: must be >= 1");
    if (embedding_dim < 1) raise(ErrorKind::ConfigInvalid, "embedding_dim: must be >= 1");
}

RetrieverConfig RunConfig::retriever_config() const {
    RetrieverConfig cfg = RetrieverConfig::defaults_for(traversal);
    cfg.alpha = effective_alpha();
    cfg.k = k;
    cfg.hop_max = hop_max;
    cfg.global_pool_size = global_pool_size;
    cfg.attribute_pool_size = attribute_pool_size;
    cfg.snippet_budget = static_cast<std::size_t>(snippet_budget);
    return cfg;
}

RolloutConfig RunConfig::rollout_config() const {
    RolloutConfig cfg;
    cfg.max_search_steps = max_search_steps;
    cfg.traversal = traversal;
    cfg.generation.temperature = temperature;
    cfg.generation.max_tokens = max_tokens;
    return cfg;
}

BaselineMode RunConfig::baseline_mode() const {
    return eval_mode == "agnostic" ? BaselineMode::StructureAgnostic : BaselineMode::GraphAware;
}

} // namespace gs
