#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gs/config.hpp"
#include "oracles.hpp"

using namespace gs;

TEST_CASE("empty config file keeps every default") {
    oracle::TempDir dir("cfg");
    auto path = oracle::write_file(dir.path() / "run.cfg", "# nothing but comments\n\n");
    RunConfig cfg = RunConfig::load(path);
    cfg.validate();

    CHECK(cfg.k == 3);
    CHECK(cfg.hop_max == 2);
    CHECK(cfg.max_search_steps == 8);
    CHECK(cfg.temperature == 0.7);
    CHECK(cfg.max_tokens == 8192);
    CHECK(cfg.global_pool_size == 50);
    CHECK(cfg.traversal == TraversalMode::Flex);
    CHECK_FALSE(cfg.alpha.has_value());
    CHECK(cfg.effective_alpha() == 0.5); // flex default

    cfg.apply_override("traversal", "R");
    CHECK(cfg.effective_alpha() == 1.0); // recursive default
}

TEST_CASE("values parse and land in the derived configs") {
    oracle::TempDir dir("cfg2");
    auto path = oracle::write_file(dir.path() / "run.cfg",
                                   "alpha = 0.25\n"
                                   "k = 5\n"
                                   "traversal = R\n"
                                   "max_search_steps = 4\n"
                                   "snippet_budget = 200\n"
                                   "classes = Movies; Books; Music\n"
                                   "backend = remote\n"
                                   "mode = agnostic\n"
                                   "seed = 99\n");
    RunConfig cfg = RunConfig::load(path);
    cfg.validate();
    CHECK(cfg.effective_alpha() == 0.25);
    CHECK(cfg.class_list == std::vector<std::string>{"Movies", "Books", "Music"});
    CHECK(cfg.baseline_mode() == BaselineMode::StructureAgnostic);
    CHECK(cfg.seed == 99);

    RetrieverConfig retr = cfg.retriever_config();
    CHECK(retr.alpha == 0.25);
    CHECK(retr.k == 5);
    CHECK(retr.snippet_budget == 200);

    RolloutConfig roll = cfg.rollout_config();
    CHECK(roll.max_search_steps == 4);
    CHECK(roll.traversal == TraversalMode::Recursive);
    CHECK(roll.generation.temperature == 0.7);
}

TEST_CASE("out-of-range alpha names the field") {
    oracle::TempDir dir("cfg3");
    auto path = oracle::write_file(dir.path() / "run.cfg", "alpha = 1.5\n");
    RunConfig cfg = RunConfig::load(path);
    try {
        cfg.validate();
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigInvalid);
        CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
}

TEST_CASE("flag overrides beat file values") {
    oracle::TempDir dir("cfg4");
    auto path = oracle::write_file(dir.path() / "run.cfg", "alpha = 1\nk = 9\n");
    RunConfig cfg = RunConfig::load(path);
    cfg.apply_override("alpha", "0");
    cfg.validate();
    CHECK(cfg.effective_alpha() == 0.0);
    CHECK(cfg.k == 9);
}

TEST_CASE("unknown keys and malformed values are rejected") {
    RunConfig cfg;
    CHECK_THROWS_AS(cfg.apply_override("banana", "1"), Error);
    CHECK_THROWS_AS(cfg.apply_override("k", "three"), Error);
    CHECK_THROWS_AS(cfg.apply_override("alpha", "0.5x"), Error);
    CHECK_THROWS_AS(cfg.apply_override("traversal", "Q"), Error);
    CHECK_THROWS_AS(cfg.apply_override("backend", "psychic"), Error);
    CHECK_THROWS_AS(cfg.apply_override("mode", "hybrid"), Error);

    oracle::TempDir dir("cfg5");
    auto bad = oracle::write_file(dir.path() / "run.cfg", "just a line without equals\n");
    CHECK_THROWS_AS(RunConfig::load(bad), Error);
    CHECK_THROWS_AS(RunConfig::load(dir.path() / "missing.cfg"), Error);
}

TEST_CASE("range validation fires per field") {
    RunConfig cfg;
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = RunConfig{};
    cfg.hop_max = 3;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = RunConfig{};
    cfg.max_tokens = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = RunConfig{};
    cfg.in_flight = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = RunConfig{};
    cfg.temperature = -0.1;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
