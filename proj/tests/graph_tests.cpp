#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gs/graph.hpp"
#include "oracles.hpp"

using namespace gs;

namespace {

AttributedGraph load_g0(IngestReport* report = nullptr) {
    oracle::TempDir dir("g0");
    auto nodes = oracle::write_file(dir.path() / "nodes.tsv", oracle::g0_nodes());
    auto edges = oracle::write_file(dir.path() / "edges.tsv", oracle::g0_edges());
    return AttributedGraph::load(nodes, edges, report);
}

AttributedGraph from_raw(const oracle::RawGraph& raw) {
    std::vector<NodeRecord> nodes(raw.n);
    for (std::size_t i = 0; i < raw.n; ++i) {
        nodes[i].external_id = "n" + std::to_string(i);
        nodes[i].text = raw.texts[i];
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (auto [u, v] : raw.edges) edges.emplace_back(u, v);
    return AttributedGraph::from_parts(std::move(nodes), edges);
}

} // namespace

TEST_CASE("g0 ingestion counts") {
    IngestReport report;
    AttributedGraph g = load_g0(&report);
    CHECK(g.node_count() == 6);
    CHECK(g.edge_count() == 5);
    CHECK(g.avg_degree() == doctest::Approx(2.0 * 5 / 6).epsilon(1e-9));
    CHECK(report.nodes == 6);
    CHECK(report.edges == 5);
    CHECK(report.self_loops_dropped == 0);
    CHECK(report.duplicates_collapsed == 0);
    CHECK(g.node(3).external_id == "a3");
    CHECK(g.find_external("a5").value() == 5);
    CHECK_FALSE(g.find_external("zz").has_value());
}

TEST_CASE("empty nodes file is EmptyGraph") {
    oracle::TempDir dir("empty");
    auto nodes = oracle::write_file(dir.path() / "nodes.tsv", "");
    auto edges = oracle::write_file(dir.path() / "edges.tsv", "");
    try {
        AttributedGraph::load(nodes, edges);
        FAIL("expected EmptyGraph");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyGraph);
    }
}

TEST_CASE("dangling edge names the unknown node") {
    oracle::TempDir dir("dangling");
    auto nodes = oracle::write_file(dir.path() / "nodes.tsv", oracle::g0_nodes());
    auto edges = oracle::write_file(dir.path() / "edges.tsv", "a7\ta9\n");
    try {
        AttributedGraph::load(nodes, edges);
        FAIL("expected DanglingEdge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DanglingEdge);
        CHECK(std::string(e.what()).find("a7") != std::string::npos);
    }
}

TEST_CASE("malformed node record reports the line number") {
    oracle::TempDir dir("malformed");
    auto nodes =
        oracle::write_file(dir.path() / "nodes.tsv", "a0\tMath\tfine text\nbroken-line\n");
    auto edges = oracle::write_file(dir.path() / "edges.tsv", "");
    try {
        AttributedGraph::load(nodes, edges);
        FAIL("expected MalformedRecord");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedRecord);
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("empty attribute text is rejected at ingestion") {
    oracle::TempDir dir("emptytext");
    auto nodes = oracle::write_file(dir.path() / "nodes.tsv", "a0\tMath\t...!!!\n");
    auto edges = oracle::write_file(dir.path() / "edges.tsv", "");
    CHECK_THROWS_AS(AttributedGraph::load(nodes, edges), Error);
}

TEST_CASE("duplicate external ids are rejected") {
    oracle::TempDir dir("dupid");
    auto nodes =
        oracle::write_file(dir.path() / "nodes.tsv", "a0\tMath\tsome text\na0\tMath\tmore text\n");
    auto edges = oracle::write_file(dir.path() / "edges.tsv", "");
    CHECK_THROWS_AS(AttributedGraph::load(nodes, edges), Error);
}

TEST_CASE("self-loops dropped and duplicate edges collapsed") {
    oracle::TempDir dir("dedup");
    auto nodes = oracle::write_file(dir.path() / "nodes.tsv", oracle::g0_nodes());
    auto edges = oracle::write_file(dir.path() / "edges.tsv",
                                    "a0\ta1\na1\ta0\na0\ta1\na3\ta3\na2\ta3\n");
    IngestReport report;
    AttributedGraph g = AttributedGraph::load(nodes, edges, &report);
    CHECK(g.edge_count() == 2);
    CHECK(report.self_loops_dropped == 1);
    CHECK(report.duplicates_collapsed == 2);
    CHECK(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(3, 3));
}

TEST_CASE("unlabeled nodes use the dash sentinel") {
    oracle::TempDir dir("nolabel");
    auto nodes = oracle::write_file(dir.path() / "nodes.tsv", "a0\t-\tsome text here\n");
    auto edges = oracle::write_file(dir.path() / "edges.tsv", "");
    AttributedGraph g = AttributedGraph::load(nodes, edges);
    CHECK_FALSE(g.node(0).label.has_value());
}

TEST_CASE("g0 hop neighborhoods and rings") {
    AttributedGraph g = load_g0();
    GraphView view(g);
    CHECK(hop_neighborhood(view, 0, 1) == std::vector<NodeId>{1, 2});
    CHECK(hop_neighborhood(view, 0, 2) == std::vector<NodeId>{1, 2, 3});
    CHECK(hop_neighborhood(view, 5, 2).empty());
    CHECK(exact_hop_ring(view, 0, 1) == std::vector<NodeId>{1, 2});
    CHECK(exact_hop_ring(view, 0, 2) == std::vector<NodeId>{3});
    CHECK(exact_hop_ring(view, 0, 9).empty()); // beyond eccentricity
    CHECK_THROWS_AS(hop_neighborhood(view, 99, 1), Error);
}

TEST_CASE("g0 degree stats") {
    AttributedGraph g = load_g0();
    DegreeStats stats = degree_stats(g);
    CHECK(stats.degree[3] == 3);
    CHECK(stats.degree[5] == 0);
    CHECK(stats.avg_degree == doctest::Approx(1.6667).epsilon(1e-3));
}

TEST_CASE("degree stats degenerate cases") {
    {
        std::vector<NodeRecord> nodes(1);
        nodes[0].external_id = "solo";
        nodes[0].text = "alone in the dark";
        AttributedGraph g = AttributedGraph::from_parts(std::move(nodes), {});
        DegreeStats stats = degree_stats(g);
        CHECK(stats.degree[0] == 0);
        CHECK(stats.avg_degree == 0.0);
    }
    {
        // complete graph K4
        std::vector<NodeRecord> nodes(4);
        for (int i = 0; i < 4; ++i) {
            nodes[i].external_id = "k" + std::to_string(i);
            nodes[i].text = "clique member " + std::to_string(i);
        }
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId u = 0; u < 4; ++u) {
            for (NodeId v = u + 1; v < 4; ++v) edges.emplace_back(u, v);
        }
        AttributedGraph g = AttributedGraph::from_parts(std::move(nodes), edges);
        DegreeStats stats = degree_stats(g);
        for (int i = 0; i < 4; ++i) CHECK(stats.degree[i] == 3);
        CHECK(stats.avg_degree == doctest::Approx(3.0));
    }
}

TEST_CASE("hop extraction matches the shortest-path oracle on random graphs") {
    std::mt19937_64 rng(20240811);
    for (int trial = 0; trial < 100; ++trial) {
        oracle::RawGraph raw = oracle::random_graph(rng, 200);
        AttributedGraph g = from_raw(raw);
        GraphView view(g);
        auto anchor = static_cast<NodeId>(oracle::uniform_below(rng, raw.n));
        auto dist = oracle::bfs_oracle(raw, anchor);

        int max_h = 1 + static_cast<int>(oracle::uniform_below(rng, 4));
        std::vector<NodeId> ball_expected;
        for (std::size_t v = 0; v < raw.n; ++v) {
            if (dist[v] > 0 && dist[v] <= max_h) ball_expected.push_back(static_cast<NodeId>(v));
        }
        CHECK(hop_neighborhood(view, anchor, max_h) == ball_expected);

        // rings partition the ball
        std::vector<NodeId> ring_union;
        for (int h = 1; h <= max_h; ++h) {
            std::vector<NodeId> ring_expected;
            for (std::size_t v = 0; v < raw.n; ++v) {
                if (dist[v] == h) ring_expected.push_back(static_cast<NodeId>(v));
            }
            auto ring = exact_hop_ring(view, anchor, h);
            CHECK(ring == ring_expected);
            ring_union.insert(ring_union.end(), ring.begin(), ring.end());
        }
        std::sort(ring_union.begin(), ring_union.end());
        CHECK(ring_union == ball_expected);
    }
}

TEST_CASE("undirected adjacency is symmetric") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        oracle::RawGraph raw = oracle::random_graph(rng, 80);
        AttributedGraph g = from_raw(raw);
        for (std::size_t u = 0; u < g.node_count(); ++u) {
            for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
                CHECK(g.has_edge(v, static_cast<NodeId>(u)));
            }
        }
    }
}

TEST_CASE("loading twice is bit-identical") {
    oracle::TempDir dir("twice");
    auto nodes = oracle::write_file(dir.path() / "nodes.tsv", oracle::g0_nodes());
    auto edges = oracle::write_file(dir.path() / "edges.tsv", oracle::g0_edges());
    AttributedGraph g1 = AttributedGraph::load(nodes, edges);
    AttributedGraph g2 = AttributedGraph::load(nodes, edges);
    g1.save_binary(dir.path() / "g1.bin");
    g2.save_binary(dir.path() / "g2.bin");

    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string b1 = slurp(dir.path() / "g1.bin");
    CHECK(b1 == slurp(dir.path() / "g2.bin"));
    CHECK(!b1.empty());

    // binary round-trip preserves everything observable
    AttributedGraph g3 = AttributedGraph::load_binary(dir.path() / "g1.bin");
    g3.save_binary(dir.path() / "g3.bin");
    CHECK(slurp(dir.path() / "g3.bin") == b1);
    CHECK(g3.node(3).label.value() == "Math");
    CHECK(g3.edge_count() == g1.edge_count());
}

TEST_CASE("graph view hides exactly the masked edge") {
    AttributedGraph g = load_g0();
    GraphView masked(g, 0, 1);

    CHECK(masked.degree(0) == 1);
    CHECK(masked.degree(1) == 1);
    CHECK(masked.degree(3) == 3);

    std::vector<NodeId> seen;
    masked.for_neighbors(0, [&](NodeId v) { seen.push_back(v); });
    CHECK(seen == std::vector<NodeId>{2});

    // hop queries respect the mask in both directions
    CHECK(hop_neighborhood(masked, 0, 1) == std::vector<NodeId>{2});
    CHECK(hop_neighborhood(masked, 1, 1) == std::vector<NodeId>{3});
    // node 1 stays reachable around the square
    CHECK(hop_neighborhood(masked, 0, 3) == std::vector<NodeId>{1, 2, 3, 4});
}
