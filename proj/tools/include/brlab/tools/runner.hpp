#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "brlab/solver.hpp"
#include "brlab/tools/config.hpp"
#include "brlab/tools/output.hpp"

namespace brlab::tools {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kSolverFailure = 3 };

struct RunOptions {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> report_path;  // `report` only
};

/// Command-line overrides of --workers and --seed.
void apply_overrides(ScenarioConfig& cfg, const RunOptions& opts);

/// Solves one member per epsilon on a shared grid, `workers` at a time.
/// Results are in epsilon order regardless of scheduling.
std::vector<Solution> solve_members(const ScenarioConfig& cfg, const std::vector<double>& epsilons,
                                    int workers);

int run_solve(const RunOptions& opts, std::ostream& log);
int run_sweep(const RunOptions& opts, std::ostream& log);
int run_analyze(const RunOptions& opts, std::ostream& log);
int run_validate(const RunOptions& opts, std::ostream& log);
int run_report(const RunOptions& opts, std::ostream& log);

/// Full analysis of solved members as a report body (without schema header).
Json analyze_members(const ScenarioConfig& cfg, const std::vector<Solution>& members,
                     const std::filesystem::path& out_dir);

}  // namespace brlab::tools
