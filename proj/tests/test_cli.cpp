#include <cmath>

#include "doctest.h"
#include "job.hpp"

using namespace acw::job;

namespace {

const std::string kData = ACW_TEST_DATA;

JobConfig fixture_job(const std::string& command, const std::string& fixture, acw::Params params = {}) {
    JobConfig cfg;
    cfg.command = command;
    cfg.fixture = fixture;
    cfg.params = std::move(params);
    cfg.timings = false;
    return cfg;
}

const json* find_check(const json& report, const std::string& name) {
    for (const auto& c : report["checks"])
        if (c["name"] == name) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("check --fixture so3 --all passes") {
    Outcome o = run(fixture_job("check", "so3"));
    CHECK(o.exit_status == 0);
    CHECK(o.report["passed"] == true);
    std::vector<std::string> names;
    for (const auto& c : o.report["checks"]) {
        names.push_back(c["name"]);
        CHECK(c["passed"] == true);
    }
    CHECK(names == std::vector<std::string>{"validate", "nilpotency", "adjust", "gauge", "closure", "spot-check"});
}

TEST_CASE("an inline Jacobi-violating config exits 1 and names the Jacobiator") {
    JobConfig cfg = load_config(kData + "/broken_jacobi.toml");
    cfg.timings = false;
    Outcome o = run(cfg);
    CHECK(o.exit_status == 1);
    const json* v = find_check(o.report, "validate");
    REQUIRE(v);
    CHECK((*v)["verdict"] == "invalid");
    CHECK((*v)["messages"][0].get<std::string>().find("Jacobiator") != std::string::npos);
}

TEST_CASE("chern --fixture monopole_S2 --n 2") {
    Outcome o = run(fixture_job("chern", "monopole_S2", {{"n", "2"}}));
    CHECK(o.exit_status == 0);
    const json* c = find_check(o.report, "chern");
    REQUIRE(c);
    CHECK(std::abs((*c)["value"].get<double>() - 2.0) < 1e-6);
}

TEST_CASE("inline TOML cover reproduces the monopole") {
    JobConfig cfg = load_config(kData + "/monopole.toml");
    cfg.command = "chern";
    Outcome o = run(cfg);
    CHECK(o.exit_status == 0);
    CHECK(std::abs((*find_check(o.report, "chern"))["value"].get<double>() - 2.0) < 1e-6);
}

TEST_CASE("inline JSON algebroid with a required tier") {
    JobConfig cfg = load_config(kData + "/so3_action.json");
    CHECK(cfg.require_tier == acw::Tier::Strict);
    cfg.command = "adjust";
    Outcome o = run(cfg);
    CHECK(o.exit_status == 0);
    CHECK((*find_check(o.report, "adjust"))["verdict"] == "strict");
}

TEST_CASE("the nilpotency audit is always reported") {
    for (const std::string cmd : {"validate", "adjust", "gauge", "closure", "spot-check"}) {
        Outcome o = run(fixture_job(cmd, "tm_torsion_R2"));
        CHECK(find_check(o.report, "nilpotency"));
    }
    JobConfig cfg = fixture_job("adjust", "so3");
    cfg.checks = {"adjust"};
    CHECK(find_check(run(cfg).report, "nilpotency"));
}

TEST_CASE("expected failures of non-examples count as passes") {
    CHECK(run(fixture_job("check", "broken_jacobi")).exit_status == 0);
    Outcome o = run(fixture_job("closure", "nonplain_tm_R2"));
    CHECK(o.exit_status == 0);
    CHECK((*find_check(o.report, "closure"))["verdict"] == "obstructed by basic curvature");
}

TEST_CASE("a required tier that is not reached fails the job") {
    JobConfig cfg = fixture_job("adjust", "nonstrict_tm_R3");
    cfg.fixture.reset();
    cfg.algebroid = json::parse(R"({"coords": ["m1", "m2"], "rank": 2, "anchor": [["1", "0"], ["0", "1"]]})");
    cfg.adjustment = json::parse(R"({"omega": {"1;1,2": "m1"}})");
    Outcome o = run(cfg);
    CHECK(o.exit_status == 1);
    CHECK((*find_check(o.report, "adjust"))["verdict"] == "none");
}

TEST_CASE("reports round-trip and are stable for a fixed seed") {
    JobConfig cfg = fixture_job("check", "lab_su2_R3");
    Outcome a = run(cfg), b = run(cfg);
    CHECK(a.report == b.report);
    CHECK(json::parse(a.report.dump()) == a.report);
    CHECK(a.report["input_digest"] == input_digest(cfg));

    JobConfig other = cfg;
    other.seed = 99;
    Outcome c = run(other);
    CHECK(c.report["input_digest"] != a.report["input_digest"]);
    CHECK(c.exit_status == a.exit_status);
}

TEST_CASE("timings are reported unless disabled") {
    JobConfig cfg = fixture_job("validate", "so3");
    cfg.timings = true;
    CHECK(run(cfg).report["checks"][0].contains("time_ms"));
    cfg.timings = false;
    CHECK_FALSE(run(cfg).report["checks"][0].contains("time_ms"));
}

TEST_CASE("TOML and JSON spellings of a config are equivalent") {
    JobConfig t = config_from_json(toml_to_json(R"(
command = "adjust"
fixture = "abelian"
seed = 5
[params]
r = 3
[tolerances]
residual = 1e-10
)"));
    JobConfig j = config_from_json(json::parse(
        R"({"command": "adjust", "fixture": "abelian", "seed": 5, "params": {"r": "3"}, "tolerances": {"residual": 1e-10}})"));
    CHECK(t.canonical() == j.canonical());
    CHECK(input_digest(t) == input_digest(j));
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"fixtur": "so3"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"tolerances": {"residual": -1}})")).validate(), ConfigError);
    CHECK_THROWS_AS(toml_to_json("command = "), ConfigError);
    CHECK_THROWS_AS(run(fixture_job("check", "unknown")), ConfigError);
    CHECK_THROWS_AS(run(fixture_job("chern", "so3")), ConfigError);
    JobConfig none;
    CHECK_THROWS_AS(none.validate(), ConfigError);

    JobConfig bad;
    bad.algebroid = json::parse(R"({"coords": ["m1"], "rank": 1, "anchor": [["m1 +"]]})");
    CHECK_THROWS_WITH_AS(run(bad), doctest::Contains("algebroid.anchor"), ConfigError);
    bad.algebroid = json::parse(R"({"coords": ["m1"], "rank": 1, "bracket": {"1;1,7": 1}})");
    CHECK_THROWS_AS(run(bad), ConfigError);
    bad.algebroid = json::parse(R"({"coords": ["m1"], "rank": 1, "anchor": [["q"]]})");
    CHECK_THROWS_AS(run(bad), ConfigError);
}

TEST_CASE("markdown rendering lists every check") {
    Outcome o = run(fixture_job("check", "so3"));
    std::string md = render_markdown(o.report);
    CHECK(md.find("| validate | valid | valid | pass |") != std::string::npos);
    CHECK(md.find("overall: **pass**") != std::string::npos);
}

TEST_CASE("subcommands map to checks in dependency order") {
    CHECK(checks_for("gauge") == std::vector<std::string>{"validate", "nilpotency", "adjust", "gauge"});
    CHECK(checks_for("chern") == std::vector<std::string>{"nilpotency", "cocycle", "chern"});
}
