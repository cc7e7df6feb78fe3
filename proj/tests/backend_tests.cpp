#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gs/backend.hpp"
#include "oracles.hpp"

using namespace gs;
using nlohmann::json;

TEST_CASE("scripted backend replays steps and flags stop sequences") {
    auto backend = ScriptedBackend::from_steps({
        "<think>t</think>\n<search> q </search>",
        "<answer>Movies</answer>",
    });
    GenerationParams params;

    Generation g1 = backend.generate("ignored", params);
    CHECK(g1.finish == FinishReason::StopSequence);
    Generation g2 = backend.generate("ignored", params);
    CHECK(g2.finish == FinishReason::EndOfSequence);
    CHECK(g2.text == "<answer>Movies</answer>");

    try {
        backend.generate("ignored", params);
        FAIL("expected ScriptExhausted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ScriptExhausted);
    }
}

TEST_CASE("script files parse numbered step blocks") {
    oracle::TempDir dir("script");
    auto path = oracle::write_file(dir.path() / "s.txt",
                                   "--- step 1 ---\n"
                                   "<think>one</think>\n"
                                   "<search> things </search>\n"
                                   "--- step 2 ---\n"
                                   "<answer>yes</answer>\n");
    auto backend = ScriptedBackend::from_file(path);
    CHECK(backend.steps_remaining() == 2);
    GenerationParams params;
    Generation g1 = backend.generate("", params);
    CHECK(g1.text == "<think>one</think>\n<search> things </search>");
    CHECK(g1.finish == FinishReason::StopSequence);
    Generation g2 = backend.generate("", params);
    CHECK(g2.text == "<answer>yes</answer>");
}

TEST_CASE("script file without steps is rejected") {
    oracle::TempDir dir("script-bad");
    auto path = oracle::write_file(dir.path() / "s.txt", "no delimiters here\n");
    CHECK_THROWS_AS(ScriptedBackend::from_file(path), Error);
}

namespace {

struct MockServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> hits{0};

    explicit MockServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions",
                    [this, handler](const httplib::Request& req, httplib::Response& res) {
                        hits.fetch_add(1);
                        handler(req, res);
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        thread.join();
    }

    RemoteBackend::Options options() const {
        RemoteBackend::Options opt;
        opt.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
        opt.model = "test-model";
        opt.api_key = "sk-test";
        opt.retry_backoff_ms = 1;
        return opt;
    }
};

json chat_reply(const std::string& content, const std::string& finish) {
    return json{{"choices",
                 json::array({json{{"message", json{{"role", "assistant"}, {"content", content}}},
                                   {"finish_reason", finish}}})}};
}

} // namespace

TEST_CASE("remote backend speaks the chat-completion wire format") {
    json seen_request;
    std::string seen_auth;
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_request = json::parse(req.body);
        if (req.has_header("Authorization")) seen_auth = req.get_header_value("Authorization");
        res.set_content(chat_reply("<answer>Movies</answer>", "stop").dump(), "application/json");
    });

    RemoteBackend backend(server.options());
    GenerationParams params;
    params.temperature = 0.7;
    params.max_tokens = 512;
    Generation gen = backend.generate("prompt text here", params);

    CHECK(gen.text == "<answer>Movies</answer>");
    CHECK(gen.finish == FinishReason::EndOfSequence);
    CHECK(seen_auth == "Bearer sk-test");
    CHECK(seen_request["model"] == "test-model");
    CHECK(seen_request["temperature"].get<double>() == doctest::Approx(0.7));
    CHECK(seen_request["max_tokens"].get<int>() == 512);
    REQUIRE(seen_request["messages"].is_array());
    CHECK(seen_request["messages"][0]["role"] == "user");
    CHECK(seen_request["messages"][0]["content"] == "prompt text here");
    REQUIRE(seen_request["stop"].is_array());
    CHECK(seen_request["stop"][0] == "</search>");
}

TEST_CASE("stop-sequence detection, including servers that strip the stop string") {
    // server includes the closing tag
    {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.set_content(chat_reply("<search> q </search>", "stop").dump(), "application/json");
        });
        RemoteBackend backend(server.options());
        Generation gen = backend.generate("p", {});
        CHECK(gen.finish == FinishReason::StopSequence);
        CHECK(gen.text == "<search> q </search>");
    }
    // server strips it; the client restores the tag
    {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.set_content(chat_reply("<think>t</think>\n<search> q ", "stop").dump(),
                            "application/json");
        });
        RemoteBackend backend(server.options());
        Generation gen = backend.generate("p", {});
        CHECK(gen.finish == FinishReason::StopSequence);
        CHECK(gen.text == "<think>t</think>\n<search> q </search>");
    }
    // length cutoff marks truncation
    {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.set_content(chat_reply("half an answ", "length").dump(), "application/json");
        });
        RemoteBackend backend(server.options());
        Generation gen = backend.generate("p", {});
        CHECK(gen.finish == FinishReason::EndOfSequence);
        CHECK(gen.truncated);
    }
}

TEST_CASE("transport-level failures retry, refusals do not") {
    // 500s retry until success
    {
        std::atomic<int> calls{0};
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            if (calls.fetch_add(1) < 2) {
                res.status = 500;
                res.set_content("overloaded", "text/plain");
                return;
            }
            res.set_content(chat_reply("<answer>ok</answer>", "stop").dump(), "application/json");
        });
        RemoteBackend backend(server.options());
        Generation gen = backend.generate("p", {});
        CHECK(gen.text == "<answer>ok</answer>");
        CHECK(server.hits.load() == 3);
    }
    // a 400 refusal fails immediately
    {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.status = 400;
            res.set_content("bad request", "text/plain");
        });
        RemoteBackend backend(server.options());
        try {
            backend.generate("p", {});
            FAIL("expected BackendFailure");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::BackendFailure);
        }
        CHECK(server.hits.load() == 1);
    }
    // persistent 500s exhaust the retry budget
    {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.status = 503;
            res.set_content("down", "text/plain");
        });
        RemoteBackend backend(server.options());
        CHECK_THROWS_AS(backend.generate("p", {}), Error);
        CHECK(server.hits.load() == 3);
    }
}

TEST_CASE("environment variables configure the remote backend") {
    ::setenv("GS_MODEL_ENDPOINT", "http://example.test:9999/v1/chat/completions", 1);
    ::setenv("GS_MODEL_NAME", "qwen-test", 1);
    ::setenv("GS_API_KEY", "sk-abc", 1);
    auto opt = RemoteBackend::from_env();
    CHECK(opt.endpoint == "http://example.test:9999/v1/chat/completions");
    CHECK(opt.model == "qwen-test");
    CHECK(opt.api_key == "sk-abc");

    ::unsetenv("GS_MODEL_ENDPOINT");
    CHECK_THROWS_AS(RemoteBackend::from_env(), Error);
    ::unsetenv("GS_MODEL_NAME");
    ::unsetenv("GS_API_KEY");
}

// ---------------------------------------------------------------------------
// full rollouts against the live mock endpoint

#include "gs/tasks.hpp"

namespace {

// A stateless "model": emits a search for a fresh transcript and an answer
// once evidence has been injected. The prompt body legitimately mentions the
// information tags (tool description, worked example), so the handler keys
// on the transcript tail, which ends with the injected block after a search.
void model_like_handler(const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    std::string transcript = body["messages"][0]["content"].get<std::string>();
    std::string content;
    const std::string injected_tail = "</information>\n";
    bool has_evidence = transcript.size() >= injected_tail.size() &&
                        transcript.compare(transcript.size() - injected_tail.size(),
                                           injected_tail.size(), injected_tail) == 0;
    if (!has_evidence) {
        content = "<think>need neighborhood evidence</think>\n"
                  "<search> mode=local, hop=1, query=\"sampling diagnostics\" </search>";
    } else {
        content = "<think>the evidence is mathematical</think>\n<answer>Math</answer>";
    }
    res.set_content(chat_reply(content, "stop").dump(), "application/json");
}

} // namespace

TEST_CASE("a remote backend drives the full inference loop") {
    oracle::TempDir dir("remote-loop");
    auto nodes = oracle::write_file(dir.path() / "n.tsv", oracle::g0_nodes());
    auto edges = oracle::write_file(dir.path() / "e.tsv", oracle::g0_edges());
    AttributedGraph g = AttributedGraph::load(nodes, edges);
    EmbeddingTable emb = EmbeddingTable::build({}, g);
    PprCache ppr({}, g);
    Retriever retriever(g, emb, ppr, RetrieverConfig::defaults_for(TraversalMode::Flex));

    MockServer server(model_like_handler);

    RolloutConfig cfg;
    cfg.traversal = TraversalMode::Flex;
    RolloutEngine engine(retriever, cfg);
    auto tmpl = PromptTemplate::builtin(TaskKind::NodeClassification, ParsePolicy::Flex);
    PromptSpec spec;
    spec.domain = "citation";
    spec.entity = "paper";
    spec.relation = "citation links";
    spec.anchor_text = g.node(0).text;
    spec.degree = g.degree(0);
    spec.avg_degree = g.avg_degree();
    spec.class_list = {"Math", "Physics", "Biology"};
    AnswerSpec answers;
    answers.kind = Answer::Kind::ClassLabel;
    answers.class_list = spec.class_list;

    RemoteBackend backend(server.options());
    std::vector<NodeId> anchors{0};
    RolloutTrace trace =
        engine.run(backend, GraphView(g), anchors, tmpl, spec, answers);

    REQUIRE(trace.answer.has_value());
    CHECK(trace.answer->label == "Math");
    CHECK(trace.searches.size() == 1);
    CHECK(trace.transcript.find("<information>") != std::string::npos);
    CHECK(server.hits.load() == 2);
}

TEST_CASE("concurrent remote evaluation respects the in-flight pool") {
    oracle::TempDir dir("remote-eval");
    auto nodes = oracle::write_file(dir.path() / "n.tsv", oracle::g0_nodes());
    auto edges = oracle::write_file(dir.path() / "e.tsv", oracle::g0_edges());
    AttributedGraph g = AttributedGraph::load(nodes, edges);
    EmbeddingTable emb = EmbeddingTable::build({}, g);
    PprCache ppr({}, g);
    Retriever retriever(g, emb, ppr, RetrieverConfig::defaults_for(TraversalMode::Flex));

    MockServer server(model_like_handler);
    auto options = server.options();

    std::vector<TaskInstance> instances;
    for (NodeId v : {0u, 1u, 2u, 3u, 4u}) {
        TaskInstance inst;
        inst.kind = TaskKind::NodeClassification;
        inst.anchors = {v};
        inst.gold_label = v < 2 ? "Math" : "Physics";
        instances.push_back(inst);
    }

    EvalOptions eval_options;
    eval_options.class_list = {"Math", "Physics", "Biology"};
    eval_options.in_flight = 3;
    eval_options.base_spec.domain = "citation";
    eval_options.base_spec.entity = "paper";
    eval_options.base_spec.relation = "citation links";

    BackendFactory factory = [options]() { return std::make_unique<RemoteBackend>(options); };
    EvalReport report =
        run_eval(instances, factory, retriever, RolloutConfig{}, eval_options);

    CHECK(report.n == 5);
    CHECK(report.failure_counts.empty());
    // the fixed "Math" answer matches the first two golds
    CHECK(report.accuracy == doctest::Approx(0.4));
    CHECK(server.hits.load() == 10); // two generations per rollout
}
