#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rimech/acceptance.hpp"

namespace rimech {

enum class ScenarioKind { el_flow, ext_flow, rel_particle, quantize, invariant_suite };

// One CSV to emit: which computed table, which of its columns (empty means
// all, in table order), and the file name relative to the run's output
// directory.  An empty table name selects the mode's primary table.
struct OutputSpec {
    std::string csv;
    std::string table;
    std::vector<std::string> columns;
};

struct ScenarioConfig {
    std::string name;
    ScenarioKind kind = ScenarioKind::el_flow;
    nlohmann::json parameters;  // validated, registry defaults already merged
    std::vector<OutputSpec> outputs;
};

// Parses and validates a config file.  Parse failures carry the reporting
// line/column; schema validation collects every violation into one error
// instead of stopping at the first.  A "registry" key pre-fills parameters
// and outputs from the named built-in scenario, with file values winning.
ScenarioConfig load_scenario(const std::string& path);

// Built-in, fully parameterized scenario fixtures.
ScenarioConfig registry_scenario(const std::string& name);
const std::vector<std::string>& registry_names();

struct RunContext {
    std::string out_dir = ".";
    double tol_scale = 1.0;
    int threads = 1;
    std::uint64_t seed = 0;
};

struct RunResult {
    std::string name;
    bool passed = true;
    std::map<std::string, double> metrics;      // residuals, drifts, norms
    std::vector<std::string> csv_files;          // paths written, in order
    std::vector<CriterionOutcome> criteria;      // invariant-suite rows
    double wall_seconds = 0.0;
    std::string message;                         // context when passed=false
};

// Executes the configured pipeline, writes the declared CSVs and a
// <name>.result.json summary into ctx.out_dir, and judges the metrics named
// in parameters.tolerances.  Module errors are rethrown with the scenario
// name prefixed.
RunResult run_scenario(const ScenarioConfig& cfg, const RunContext& ctx);

// Round-trip for result files, used by the report command.
nlohmann::json result_to_json(const RunResult& result);
RunResult result_from_json(const nlohmann::json& j);

struct InvariantReport {
    std::vector<CriterionOutcome> rows;  // merged per criterion id, worst kept
    bool all_passed = true;              // also false on failed scenario rows
    std::string table;                   // rendered text
};

// Pass/fail table of every acceptance criterion outcome found in the
// results, plus a trailer naming failed scenarios.  Empty input is an empty,
// successful report.
InvariantReport invariant_report(const std::vector<RunResult>& results);

}  // namespace rimech
