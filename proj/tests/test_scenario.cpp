#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rimech/scenario.hpp"
#include "test_support.hpp"

using namespace rimech;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("scenario_test_tmp") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string write_config(const std::string& dir, const std::string& file,
                         const std::string& body) {
    const fs::path path = fs::path(dir) / file;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "missing file ", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

template <typename F>
std::string thrown_message(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("unreadable or malformed config files are parse errors") {
    const std::string dir = fresh_dir("load");

    CHECK(thrown_kind([&] { load_scenario(dir + "/does_not_exist.json"); }) ==
          ErrorKind::parse_error);

    const std::string bad = write_config(dir, "bad.json", "{ this is not json");
    CHECK(thrown_kind([&] { load_scenario(bad); }) == ErrorKind::parse_error);
    CHECK(thrown_message([&] { load_scenario(bad); }).find("bad.json") != std::string::npos);
}

TEST_CASE("a broken config reports every violation in one error") {
    const std::string dir = fresh_dir("broken");
    const std::string path = write_config(dir, "broken.json", R"({
        "name": "bad one!",
        "kind": "el-flow",
        "parameters": {
            "grid": {"start": 0.0, "stop": -1.0, "count": 1},
            "closure": "bogus",
            "extra_knob": 3,
            "x0": 0.1
        }
    })");

    CHECK(thrown_kind([&] { load_scenario(path); }) == ErrorKind::schema_error);
    const std::string msg = thrown_message([&] { load_scenario(path); });
    for (const char* fragment : {"name", "phi", "v0", "closure", "extra_knob", "stop", "count"})
        CHECK_MESSAGE(msg.find(fragment) != std::string::npos, "missing '", fragment,
                      "' in: ", msg);

    // All of those arrive joined in a single throw, not one at a time.
    std::size_t separators = 0;
    for (std::size_t at = msg.find("; "); at != std::string::npos; at = msg.find("; ", at + 1))
        ++separators;
    CHECK(separators >= 5);
}

TEST_CASE("the registry is enumerable and every entry is runnable as-is") {
    const std::set<std::string> expected = {
        "appendix-weak-gravity", "bracket-table",      "factor-of-two", "gauge-invariance",
        "magnetic-orbit",        "plane-wave-norm",    "proper-time-catalog"};
    std::set<std::string> got(registry_names().begin(), registry_names().end());
    CHECK(got == expected);

    for (const std::string& name : registry_names()) {
        const ScenarioConfig cfg = registry_scenario(name);
        CHECK(cfg.name == name);
        CHECK(!cfg.outputs.empty());
    }

    const std::string msg = thrown_message([] { registry_scenario("mystery"); });
    CHECK(thrown_kind([] { registry_scenario("mystery"); }) == ErrorKind::schema_error);
    CHECK(msg.find("mystery") != std::string::npos);
    CHECK(msg.find("bracket-table") != std::string::npos);
}

TEST_CASE("registry prefill merges file parameters over the preset") {
    const std::string dir = fresh_dir("merge");
    const std::string path = write_config(dir, "merged.json", R"({
        "registry": "proper-time-catalog",
        "name": "merged",
        "parameters": {"probes": 3}
    })");

    const ScenarioConfig cfg = load_scenario(path);
    CHECK(cfg.name == "merged");
    CHECK(cfg.kind == ScenarioKind::ext_flow);
    CHECK(cfg.parameters.at("probes").get<int>() == 3);
    CHECK(cfg.parameters.at("phi").at("family").get<std::string>() == "sinusoid");
    CHECK(cfg.parameters.at("E").get<double>() == 2.5);
    REQUIRE(cfg.outputs.size() == 1);
    CHECK(cfg.outputs[0].csv == "rates.csv");

    const std::string conflict = write_config(dir, "conflict.json", R"({
        "registry": "proper-time-catalog",
        "kind": "quantize"
    })");
    CHECK(thrown_kind([&] { load_scenario(conflict); }) == ErrorKind::schema_error);
    CHECK(thrown_message([&] { load_scenario(conflict); }).find("conflicts") !=
          std::string::npos);

    const std::string unknown = write_config(dir, "unknown.json", R"({
        "registry": "mystery"
    })");
    const std::string msg = thrown_message([&] { load_scenario(unknown); });
    CHECK(msg.find("unknown registry scenario 'mystery'") != std::string::npos);
    CHECK(msg.find("magnetic-orbit") != std::string::npos);
}

TEST_CASE("bracket table emission: exact values, stable layout, summary file") {
    RunContext ctx;
    ctx.out_dir = fresh_dir("bracket");
    const ScenarioConfig cfg = registry_scenario("bracket-table");
    const RunResult result = run_scenario(cfg, ctx);

    CHECK(result.passed);
    CHECK(result.metrics.at("table-error") == 0.0);
    CHECK(result.wall_seconds >= 0.0);
    REQUIRE(result.csv_files.size() == 1);

    const auto rows = lines_of(slurp(result.csv_files[0]));
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == "mu,nu,bracket,expected");
    CHECK(rows[1] == "0,0,-1,-1");
    CHECK(rows.size() == 1 + 16);  // 4x4 pairs

    CHECK(fs::exists(fs::path(ctx.out_dir) / "bracket-table.result.json"));
}

TEST_CASE("rate tables are byte-identical for a fixed seed") {
    const ScenarioConfig cfg = registry_scenario("proper-time-catalog");

    RunContext a;
    a.out_dir = fresh_dir("rates_a");
    a.seed = 42;
    const RunResult ra = run_scenario(cfg, a);
    CHECK(ra.passed);
    CHECK(ra.metrics.at("rate-error") < 1e-9);

    RunContext b = a;
    b.out_dir = fresh_dir("rates_b");
    const RunResult rb = run_scenario(cfg, b);

    const std::string bytes_a = slurp(ra.csv_files[0]);
    const std::string bytes_b = slurp(rb.csv_files[0]);
    CHECK(bytes_a == bytes_b);
    CHECK(lines_of(bytes_a)[0] == "form,t,p0,expected,measured,gap");

    RunContext c = a;
    c.out_dir = fresh_dir("rates_c");
    c.seed = 43;
    const RunResult rc = run_scenario(cfg, c);
    CHECK(slurp(rc.csv_files[0]) != bytes_a);
}

TEST_CASE("metric tolerances are judged, and must name real metrics") {
    RunContext ctx;
    ctx.out_dir = fresh_dir("judge");

    ScenarioConfig strict = registry_scenario("proper-time-catalog");
    strict.parameters["tolerances"] = nlohmann::json::object({{"rate-error", 1e-30}});
    const RunResult failed = run_scenario(strict, ctx);
    CHECK_FALSE(failed.passed);
    CHECK(failed.message.find("rate-error") != std::string::npos);
    CHECK(failed.message.find("exceeds bound") != std::string::npos);

    // A generous tol_scale rescues the same configuration.
    RunContext loose = ctx;
    loose.out_dir = fresh_dir("judge_loose");
    loose.tol_scale = 1e25;
    CHECK(run_scenario(strict, loose).passed);

    ScenarioConfig misnamed = registry_scenario("bracket-table");
    misnamed.parameters["tolerances"] = nlohmann::json::object({{"no-such-metric", 1.0}});
    CHECK(thrown_kind([&] { run_scenario(misnamed, ctx); }) == ErrorKind::schema_error);
    const std::string msg = thrown_message([&] { run_scenario(misnamed, ctx); });
    CHECK(msg.find("names no metric") != std::string::npos);
    CHECK(msg.find("table-error") != std::string::npos);
}

TEST_CASE("declared outputs must reference produced tables and columns") {
    RunContext ctx;
    ctx.out_dir = fresh_dir("outputs");

    ScenarioConfig wrong_table = registry_scenario("bracket-table");
    wrong_table.outputs[0].table = "nope";
    CHECK(thrown_kind([&] { run_scenario(wrong_table, ctx); }) == ErrorKind::schema_error);
    CHECK(thrown_message([&] { run_scenario(wrong_table, ctx); }).find("table 'nope'") !=
          std::string::npos);

    ScenarioConfig wrong_column = registry_scenario("bracket-table");
    wrong_column.outputs[0].columns = {"mu", "bogus"};
    const std::string msg = thrown_message([&] { run_scenario(wrong_column, ctx); });
    CHECK(msg.find("column 'bogus'") != std::string::npos);
    CHECK(msg.find("scenario 'bracket-table'") != std::string::npos);

    ScenarioConfig subset = registry_scenario("bracket-table");
    subset.outputs[0].columns = {"bracket"};
    const RunResult ok = run_scenario(subset, ctx);
    const auto rows = lines_of(slurp(ok.csv_files[0]));
    CHECK(rows[0] == "bracket");
    CHECK(rows[1] == "-1");
}

TEST_CASE("module failures carry the scenario name and keep their kind") {
    ScenarioConfig cfg;
    cfg.name = "bad-shell";
    cfg.kind = ScenarioKind::ext_flow;
    cfg.parameters = nlohmann::json::parse(R"({
        "mode": "flow",
        "hamiltonian": "momentum",
        "p_ref": 0.5,
        "grid": {"start": 0.0, "stop": 1.0, "count": 11},
        "state0": {"x": [0.0, 0.0], "p": [0.3, 0.9]}
    })");

    RunContext ctx;
    ctx.out_dir = fresh_dir("wrapped");
    CHECK(thrown_kind([&] { run_scenario(cfg, ctx); }) == ErrorKind::constraint_violation);
    const std::string msg = thrown_message([&] { run_scenario(cfg, ctx); });
    CHECK(msg.find("scenario 'bad-shell':") != std::string::npos);
    // The kind appears once, as the prefix, not doubled by the rewrap.
    CHECK(msg.find("constraint-violation") == 0);
    CHECK(msg.find("constraint-violation", 1) == std::string::npos);
}

TEST_CASE("flow scenarios run end to end") {
    RunContext ctx;
    ctx.out_dir = fresh_dir("smoke_el");
    const RunResult el = run_scenario(registry_scenario("gauge-invariance"), ctx);
    CHECK(el.passed);
    CHECK(el.metrics.at("gauge-mismatch") < 1e-6);
    CHECK(lines_of(slurp(el.csv_files[0]))[0] == "lambda,q,v,L");

    ScenarioConfig wave;
    wave.name = "wave-smoke";
    wave.kind = ScenarioKind::quantize;
    wave.parameters = nlohmann::json::parse(R"({
        "mode": "synthesize",
        "phi": {"family": "constant", "params": [2.0]},
        "grid": {"start": 0.0, "stop": 1.0, "count": 2001},
        "gauge": "proper",
        "asymptotic": 2.0,
        "windows": [0.5],
        "tolerances": {"norm-gap-w0": 1e-6}
    })");
    wave.outputs = {{"wave.csv", "wave", {}}, {"norms.csv", "norms", {}}};

    RunContext wctx;
    wctx.out_dir = fresh_dir("smoke_wave");
    const RunResult wr = run_scenario(wave, wctx);
    CHECK(wr.passed);
    CHECK(wr.metrics.at("norm-w0") == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(lines_of(slurp(wr.csv_files[0]))[0] == "t,re,im,abs");
    CHECK(fs::exists(fs::path(wctx.out_dir) / "norms.csv"));
}

TEST_CASE("result files round trip") {
    RunResult r;
    r.name = "roundtrip";
    r.passed = false;
    r.metrics = {{"alpha", 1.5}, {"beta", 2.5e-11}};
    r.csv_files = {"a.csv", "b.csv"};
    r.wall_seconds = 0.25;
    r.message = "beta = 2.5e-11 exceeds bound 1e-30";
    CriterionOutcome c;
    c.id = 3;
    c.title = "parametrization rates";
    c.passed = false;
    c.measured = 2.5;
    c.threshold = 1.0;
    c.detail = "worst probe 2.5";
    r.criteria.push_back(c);

    const RunResult back = result_from_json(result_to_json(r));
    CHECK(back.name == r.name);
    CHECK(back.passed == r.passed);
    CHECK(back.metrics == r.metrics);
    CHECK(back.csv_files == r.csv_files);
    CHECK(back.wall_seconds == r.wall_seconds);
    CHECK(back.message == r.message);
    REQUIRE(back.criteria.size() == 1);
    CHECK(back.criteria[0].id == 3);
    CHECK(back.criteria[0].title == c.title);
    CHECK(back.criteria[0].passed == c.passed);
    CHECK(back.criteria[0].measured == c.measured);
    CHECK(back.criteria[0].threshold == c.threshold);
    CHECK(back.criteria[0].detail == c.detail);
}

TEST_CASE("invariant report merges worst outcomes and names failed runs") {
    CHECK(invariant_report({}).all_passed);
    CHECK(invariant_report({}).rows.empty());
    CHECK(invariant_report({}).table.empty());

    auto outcome = [](int id, bool passed, double measured, const std::string& title) {
        CriterionOutcome c;
        c.id = id;
        c.passed = passed;
        c.measured = measured;
        c.title = title;
        return c;
    };

    RunResult r1;
    r1.name = "suite-a";
    r1.passed = true;
    r1.criteria = {outcome(4, true, 0.3, "gauge closure")};

    RunResult r2;
    r2.name = "suite-b";
    r2.passed = false;
    r2.message = "criterion 4 failed";
    r2.criteria = {outcome(4, false, 0.9, "gauge closure"), outcome(2, true, 0.1, "brackets")};

    const InvariantReport report = invariant_report({r1, r2});
    CHECK_FALSE(report.all_passed);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].id == 2);
    CHECK(report.rows[1].id == 4);
    CHECK(report.rows[1].measured == 0.9);   // the worse of 0.3 and 0.9 survives
    CHECK_FALSE(report.rows[1].passed);
    CHECK(report.table.find("FAIL") != std::string::npos);
    CHECK(report.table.find("gauge closure") != std::string::npos);
    CHECK(report.table.find("failed scenarios:") != std::string::npos);
    CHECK(report.table.find("suite-b: criterion 4 failed") != std::string::npos);

    // A failed run with no criteria still fails the report.
    RunResult r3;
    r3.name = "suite-c";
    r3.passed = false;
    r3.message = "boom";
    const InvariantReport only_failure = invariant_report({r3});
    CHECK_FALSE(only_failure.all_passed);
    CHECK(only_failure.rows.empty());
    CHECK(only_failure.table.find("suite-c: boom") != std::string::npos);
}

TEST_CASE("invariant-suite scenarios execute the selected criteria") {
    ScenarioConfig cfg;
    cfg.name = "mini-suite";
    cfg.kind = ScenarioKind::invariant_suite;
    cfg.parameters = nlohmann::json::parse(R"({"criteria": [10]})");
    cfg.outputs = {{"crit.csv", "criteria", {}}};

    RunContext ctx;
    ctx.out_dir = fresh_dir("suite");
    const RunResult result = run_scenario(cfg, ctx);

    CHECK(result.passed);
    CHECK(result.metrics.at("failed-count") == 0.0);
    REQUIRE(result.criteria.size() == 1);
    CHECK(result.criteria[0].id == 10);
    CHECK(result.criteria[0].passed);
    CHECK(lines_of(slurp(result.csv_files[0]))[0] == "id,title,passed,measured,threshold,detail");
}

}  // TEST_SUITE
