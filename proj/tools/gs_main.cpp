#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "gs/backend.hpp"
#include "gs/config.hpp"
#include "gs/synthetic.hpp"
#include "gs/tasks.hpp"
#include "gs/text.hpp"

namespace {

using namespace gs;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::ConfigInvalid, "cannot write " + path.string());
    out << content;
}

struct IndexBundle {
    AttributedGraph graph;
    EmbeddingTable embeddings;
    std::unique_ptr<PprCache> ppr;
};

IndexBundle open_index(const std::filesystem::path& dir) {
    auto graph_bin = dir / "graph.bin";
    if (!std::filesystem::exists(graph_bin)) {
        raise(ErrorKind::ConfigInvalid,
              graph_bin.string() + " not found; run `gs ingest` first");
    }
    IndexBundle bundle{AttributedGraph::load_binary(graph_bin), {}, nullptr};
    if (!std::filesystem::exists(dir / "embeddings.manifest.json")) {
        raise(ErrorKind::ConfigInvalid,
              (dir / "embeddings.manifest.json").string() + " not found; run `gs index` first");
    }
    bundle.embeddings = EmbeddingTable::load(dir);
    bundle.ppr = std::make_unique<PprCache>(dir / "ppr-cache", bundle.graph);
    return bundle;
}

// Applies `--key value` style overrides collected by CLI11 on top of an
// optional config file, preserving flag-over-file precedence.
struct ConfigBuilder {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    void bind_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key = value config file");
        auto capture = [this](const std::string& key) {
            return [this, key](const std::string& value) {
                overrides.emplace_back(key, value);
                return true;
            };
        };
        cmd->add_option_function<std::string>("--alpha", capture("alpha"),
                                              "hybrid score weight in [0,1] "
                                              "(default: 1 for R, 0.5 for F)");
        cmd->add_option_function<std::string>("--k", capture("k"),
                                              "results returned per search (default: 3)");
        cmd->add_option_function<std::string>("--hop-max", capture("hop_max"),
                                              "largest hop a local query may request (default: 2)");
        cmd->add_option_function<std::string>(
            "--global-pool-size", capture("global_pool_size"),
            "personalized-pagerank pool size (default: 50)");
        cmd->add_option_function<std::string>(
            "--attribute-pool-size", capture("attribute_pool_size"),
            "attribute-similarity pool size (default: 50)");
        cmd->add_option_function<std::string>(
            "--snippet-budget", capture("snippet_budget"),
            "chars of attribute text injected per node (default: 600)");
        cmd->add_option_function<std::string>("--traversal", capture("traversal"),
                                              "traversal policy R or F (default: F)");
        cmd->add_option_function<std::string>(
            "--max-search-steps", capture("max_search_steps"),
            "search step cap per rollout (default: 8)");
        cmd->add_option_function<std::string>("--temperature", capture("temperature"),
                                              "backend sampling temperature (default: 0.7)");
        cmd->add_option_function<std::string>("--max-tokens", capture("max_tokens"),
                                              "rollout token budget (default: 8192)");
        cmd->add_option_function<std::string>("--backend", capture("backend"),
                                              "scripted | remote (default: scripted)");
        cmd->add_option_function<std::string>("--script", capture("script"),
                                              "scripted backend trace file");
        cmd->add_option_function<std::string>("--mode", capture("mode"),
                                              "graph | agnostic retrieval (default: graph)");
        cmd->add_option_function<std::string>("--in-flight", capture("in_flight"),
                                              "concurrent rollouts in eval (default: 8)");
        cmd->add_option_function<std::string>("--seed", capture("seed"),
                                              "seed for all sampling (default: 0)");
        cmd->add_option_function<std::string>("--domain", capture("domain"),
                                              "graph domain name in prompts (default: generic)");
        cmd->add_option_function<std::string>("--entity", capture("entity"),
                                              "node noun in prompts (default: node)");
        cmd->add_option_function<std::string>("--relation", capture("relation"),
                                              "edge description in prompts (default: edges)");
        cmd->add_option_function<std::string>("--classes", capture("classes"),
                                              "semicolon-separated class list "
                                              "(default: derive from graph labels)");
        cmd->add_option_function<std::string>("--three-mode", capture("three_mode"),
                                              "advertise mode=attribute in prompts (default: 0)");
    }

    RunConfig build() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        for (const auto& [key, value] : overrides) cfg.apply_override(key, value);
        cfg.validate();
        return cfg;
    }
};

BackendFactory make_backend_factory(const RunConfig& cfg) {
    if (cfg.backend == "scripted") {
        if (cfg.script_path.empty()) {
            raise(ErrorKind::ConfigInvalid, "scripted backend needs --script");
        }
        auto scripted = ScriptedBackend::from_file(cfg.script_path);
        return [scripted]() { return std::make_unique<ScriptedBackend>(scripted); };
    }
    auto options = RemoteBackend::from_env();
    return [options]() { return std::make_unique<RemoteBackend>(options); };
}

int cmd_ingest(const std::string& nodes, const std::string& edges, const std::string& out_dir) {
    IngestReport report;
    AttributedGraph g = AttributedGraph::load(nodes, edges, &report);
    std::filesystem::create_directories(out_dir);
    g.save_binary(std::filesystem::path(out_dir) / "graph.bin");
    write_file(std::filesystem::path(out_dir) / "ingest-report.txt", report.to_text());
    std::cout << report.to_text();
    return 0;
}

int cmd_index(const std::string& index_dir, const std::string& vectors, std::size_t dim,
              const std::string& warm_anchors) {
    auto graph_bin = std::filesystem::path(index_dir) / "graph.bin";
    if (!std::filesystem::exists(graph_bin)) {
        raise(ErrorKind::ConfigInvalid, graph_bin.string() + " not found; run `gs ingest` first");
    }
    AttributedGraph g = AttributedGraph::load_binary(graph_bin);

    EncoderConfig enc_cfg;
    if (!vectors.empty()) {
        enc_cfg.kind = EncoderKind::Precomputed;
        enc_cfg.vectors_path = vectors;
    } else {
        enc_cfg.dim = dim;
    }
    EmbeddingTable table = EmbeddingTable::build(enc_cfg, g);
    table.save(index_dir);
    std::cout << "embeddings: " << table.size() << " x " << table.dim() << "\n";

    if (!warm_anchors.empty()) {
        PprCache cache(std::filesystem::path(index_dir) / "ppr-cache", g);
        PprConfig ppr_cfg;
        std::size_t warmed = 0;
        std::string_view rest = warm_anchors;
        while (!rest.empty()) {
            std::string_view item = rest;
            std::size_t pos = rest.find(',');
            if (pos == std::string_view::npos) {
                rest = {};
            } else {
                item = rest.substr(0, pos);
                rest = rest.substr(pos + 1);
            }
            auto t = trim(item);
            if (t.empty()) continue;
            cache.top_m(GraphView(g), g.require_external(t), ppr_cfg);
            ++warmed;
        }
        std::cout << "ppr cache warmed for " << warmed << " anchors\n";
    }
    return 0;
}

struct RunArgs {
    std::string index_dir;
    std::string anchor;
    std::string anchor_b;
    std::string task = "classify";
    std::string out_dir;
};

int cmd_run(const RunArgs& args, const ConfigBuilder& builder) {
    RunConfig cfg = builder.build();
    IndexBundle index = open_index(args.index_dir);
    const AttributedGraph& g = index.graph;

    std::vector<NodeId> anchors{g.require_external(args.anchor)};
    TaskKind task = TaskKind::NodeClassification;
    if (args.task == "link") {
        task = TaskKind::LinkPrediction;
        if (args.anchor_b.empty()) {
            raise(ErrorKind::ConfigInvalid, "link task needs --anchor-b");
        }
        anchors.push_back(g.require_external(args.anchor_b));
    } else if (args.task != "classify") {
        raise(ErrorKind::ConfigInvalid, "task must be classify or link, got " + args.task);
    }

    Retriever retriever(g, index.embeddings, *index.ppr, cfg.retriever_config());
    RolloutEngine engine(retriever, cfg.rollout_config());

    DegreeStats degrees = degree_stats(g);
    PromptSpec spec;
    spec.domain = cfg.domain;
    spec.entity = cfg.entity;
    spec.relation = cfg.relation;
    spec.anchor_text = g.node(anchors[0]).text;
    spec.degree = degrees.degree[anchors[0]];
    spec.avg_degree = degrees.avg_degree;

    AnswerSpec answer_spec;
    ParsePolicy policy = cfg.traversal == TraversalMode::Recursive ? ParsePolicy::Recursive
                                                                   : ParsePolicy::Flex;
    PromptTemplate tmpl;
    if (task == TaskKind::NodeClassification) {
        spec.class_list = cfg.class_list.empty() ? derive_class_list(g) : cfg.class_list;
        answer_spec.kind = Answer::Kind::ClassLabel;
        answer_spec.class_list = spec.class_list;
        tmpl = !cfg.templates_dir.empty()
                   ? PromptTemplate::load(cfg.templates_dir /
                                          (policy == ParsePolicy::Flex ? "classify_flex.txt"
                                                                       : "classify_recursive.txt"))
                   : PromptTemplate::builtin(task, policy, cfg.three_mode);
    } else {
        spec.anchor_text_b = g.node(anchors[1]).text;
        answer_spec.kind = Answer::Kind::LinkYesNo;
        tmpl = !cfg.templates_dir.empty()
                   ? PromptTemplate::load(cfg.templates_dir /
                                          (policy == ParsePolicy::Flex ? "link_flex.txt"
                                                                       : "link_recursive.txt"))
                   : PromptTemplate::builtin(task, policy, cfg.three_mode);
    }

    auto backend = make_backend_factory(cfg)();
    std::vector<RetrievalLogEntry> log;
    RolloutTrace trace = engine.run(*backend, GraphView(g), anchors, tmpl, spec, answer_spec,
                                    &log, cfg.baseline_mode() == BaselineMode::StructureAgnostic);
    std::cout << trace.render();

    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        write_file(std::filesystem::path(args.out_dir) / "trace.txt", trace.render());
        std::string log_text;
        for (const auto& entry : log) log_text += entry.to_line() + "\n";
        write_file(std::filesystem::path(args.out_dir) / "retrieval.log", log_text);
    }
    return trace.failure ? 1 : 0;
}

struct EvalArgs {
    std::string index_dir;
    std::string instances;
    std::string task = "classify";
    std::string sample_links; // "POS,NEG"
    std::string out_dir;
};

int cmd_eval(const EvalArgs& args, const ConfigBuilder& builder) {
    RunConfig cfg = builder.build();
    IndexBundle index = open_index(args.index_dir);
    const AttributedGraph& g = index.graph;

    std::vector<TaskInstance> instances;
    std::vector<std::string> classes =
        cfg.class_list.empty() ? derive_class_list(g) : cfg.class_list;
    if (args.task == "classify") {
        if (args.instances.empty()) {
            raise(ErrorKind::ConfigInvalid, "classification eval needs --instances");
        }
        instances = load_classification_instances(args.instances, g, classes);
    } else if (args.task == "link") {
        if (!args.sample_links.empty()) {
            std::string_view pos, neg = args.sample_links;
            if (!split_once(neg, ',', pos, neg)) {
                raise(ErrorKind::ConfigInvalid, "--sample-links expects POS,NEG");
            }
            auto parse_count = [](std::string_view s) -> std::size_t {
                std::size_t value = 0;
                if (s.empty()) raise(ErrorKind::ConfigInvalid, "--sample-links expects POS,NEG");
                for (char c : s) {
                    if (c < '0' || c > '9') {
                        raise(ErrorKind::ConfigInvalid,
                              "--sample-links: not a count: " + std::string(s));
                    }
                    value = value * 10 + static_cast<std::size_t>(c - '0');
                }
                return value;
            };
            instances = build_link_instances(g, parse_count(trim(pos)), parse_count(trim(neg)),
                                             cfg.seed);
        } else if (!args.instances.empty()) {
            instances = load_link_instances(args.instances, g);
        } else {
            raise(ErrorKind::ConfigInvalid, "link eval needs --instances or --sample-links");
        }
    } else {
        raise(ErrorKind::ConfigInvalid, "task must be classify or link, got " + args.task);
    }

    Retriever retriever(g, index.embeddings, *index.ppr, cfg.retriever_config());

    EvalOptions options;
    options.mode = cfg.baseline_mode();
    options.in_flight = cfg.in_flight;
    options.class_list = classes;
    options.three_mode_templates = cfg.three_mode;
    options.base_spec.domain = cfg.domain;
    options.base_spec.entity = cfg.entity;
    options.base_spec.relation = cfg.relation;

    EvalReport report = run_eval(instances, make_backend_factory(cfg), retriever,
                                 cfg.rollout_config(), options);
    std::cout << report.to_text();

    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        write_file(std::filesystem::path(args.out_dir) / "report.txt", report.to_text());
        write_file(std::filesystem::path(args.out_dir) / "outcomes.csv", report.to_csv());
    }
    return 0;
}

struct BenchArgs {
    std::size_t n = 100000;
    double avg_degree = 20.0;
    std::size_t queries = 5000;
    std::uint64_t seed = 1;
    int threads = 0;
    std::size_t dim = 256;
};

int cmd_bench(const BenchArgs& args) {
    std::cerr << "building synthetic graph: n=" << args.n << " avg_degree=" << args.avg_degree
              << "\n";
    AttributedGraph g = make_synthetic_graph(args.n, args.avg_degree, args.seed);
    EncoderConfig enc_cfg;
    enc_cfg.dim = args.dim;
    EmbeddingTable table = EmbeddingTable::build(enc_cfg, g);
    PprCache cache({}, g);
    BenchResult result = bench_retrieval(g, table, cache, args.queries, args.seed, args.threads);
    std::cout << result.to_text();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"agentic structure-aware retrieval over attributed graphs"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // ingest
    std::string nodes, edges, out_dir;
    auto* ingest = app.add_subcommand("ingest", "build the graph index from TSV files");
    ingest->add_option("--nodes", nodes, "nodes file: external_id<TAB>label<TAB>text")->required();
    ingest->add_option("--edges", edges, "edges file: external_id<TAB>external_id")->required();
    ingest->add_option("--out", out_dir, "index directory to create")->required();

    // index
    std::string index_dir, vectors, warm_anchors;
    std::size_t dim = 256;
    auto* index_cmd = app.add_subcommand("index", "build corpus embeddings (and warm PPR cache)");
    index_cmd->add_option("--index", index_dir, "index directory from `gs ingest`")->required();
    index_cmd->add_option("--vectors", vectors, "precomputed vectors file (dim=<D> header)");
    index_cmd->add_option("--dim", dim, "builtin encoder dimension (default: 256)");
    index_cmd->add_option("--warm-anchors", warm_anchors,
                          "comma-separated external ids to pre-compute PPR pools for");

    // run
    RunArgs run_args;
    ConfigBuilder run_builder;
    auto* run_cmd = app.add_subcommand("run", "run a single rollout and print the trace");
    run_cmd->add_option("--index", run_args.index_dir, "index directory")->required();
    run_cmd->add_option("--anchor", run_args.anchor, "anchor node external id")->required();
    run_cmd->add_option("--anchor-b", run_args.anchor_b, "second node for link prediction");
    run_cmd->add_option("--task", run_args.task, "classify | link (default: classify)");
    run_cmd->add_option("--out", run_args.out_dir, "directory for trace.txt and retrieval.log");
    run_builder.bind_common(run_cmd);

    // eval
    EvalArgs eval_args;
    ConfigBuilder eval_builder;
    auto* eval_cmd = app.add_subcommand("eval", "batch evaluation with an EvalReport");
    eval_cmd->add_option("--index", eval_args.index_dir, "index directory")->required();
    eval_cmd->add_option("--instances", eval_args.instances, "instances file");
    eval_cmd->add_option("--task", eval_args.task, "classify | link (default: classify)");
    eval_cmd->add_option("--sample-links", eval_args.sample_links,
                         "sample POS,NEG link instances instead of --instances");
    eval_cmd->add_option("--out", eval_args.out_dir, "directory for report.txt and outcomes.csv");
    eval_builder.bind_common(eval_cmd);

    // bench
    BenchArgs bench_args;
    auto* bench_cmd =
        app.add_subcommand("bench", "graph-aware vs structure-agnostic retrieval latency");
    bench_cmd->add_option("--n", bench_args.n, "synthetic graph size (default: 100000)");
    bench_cmd->add_option("--avg-degree", bench_args.avg_degree,
                          "synthetic average degree (default: 20)");
    bench_cmd->add_option("--queries", bench_args.queries, "number of queries (default: 5000)");
    bench_cmd->add_option("--seed", bench_args.seed, "graph and query seed (default: 1)");
    bench_cmd->add_option("--threads", bench_args.threads,
                          "query threads, 0 = hardware (default: 0)");
    bench_cmd->add_option("--dim", bench_args.dim, "embedding dimension (default: 256)");

    try {
        app.parse(argc, argv);
        if (ingest->parsed()) return cmd_ingest(nodes, edges, out_dir);
        if (index_cmd->parsed()) return cmd_index(index_dir, vectors, dim, warm_anchors);
        if (run_cmd->parsed()) return cmd_run(run_args, run_builder);
        if (eval_cmd->parsed()) return cmd_eval(eval_args, eval_builder);
        if (bench_cmd->parsed()) return cmd_bench(bench_args);
        std::cerr << "error: UnknownCommand: no subcommand given\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            return app.exit(e);
        }
        std::cerr << "error: UnknownCommand: " << e.what() << "\n";
        return 2;
    } catch (const gs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
