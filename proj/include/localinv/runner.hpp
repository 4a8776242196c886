#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "localinv/suite.hpp"

namespace localinv::runner {

using json = nlohmann::json;

enum class Task { certify, scales, invert, sheets, hadamard_levy, implicit_graph, ode, full_suite };

const char* to_string(Task t);
Task task_from_string(const std::string& s);

/// Run configuration: problem addressing, task, seed, budgets, tolerances.
/// Unknown fields in the config file are rejected.
struct RunConfig {
    std::string problem;           // empty for full_suite
    json params;                   // problem parameters (e.g. ha: {"a":0,"c":1})
    Task task = Task::full_suite;
    std::optional<std::uint64_t> seed;
    cert::Budgets budgets;
    cert::Tolerances tolerances;
    std::string out_dir = "out";
    bool verbose = false;
};

RunConfig parse_config(const json& j);
RunConfig load_config_file(const std::string& path);

/// One report entry: measured values vs oracle values, a pass flag and the
/// provenance of the expectation (closed_form, bisection_oracle,
/// grid_oracle, formula, internal).
struct Check {
    std::string name;
    std::string problem;
    std::string task;
    bool pass = false;
    json measured;
    json oracle;
    std::string provenance;
    std::string note;
};

struct RunResult {
    std::vector<Check> checks;  // sorted by name before serialization
    json report;                // full payload (config echo + checks)
    std::vector<std::pair<std::string, std::string>> tables;  // name -> csv text
    bool all_pass = false;
};

/// Execute the task; deterministic given (config, seed) regardless of the
/// thread cap. Does not touch the filesystem.
RunResult run(const RunConfig& config);

/// Write report.json and tables/*.csv under config.out_dir.
void write_outputs(const RunConfig& config, const RunResult& result);

/// Exit-code semantics: 0 all-pass, 1 any failed check, 2 config error.
int run_and_write(const RunConfig& config);

}  // namespace localinv::runner
