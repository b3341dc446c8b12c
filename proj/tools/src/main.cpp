#include <iostream>

#include "CLI11.hpp"
#include "brlab/tools/runner.hpp"

using namespace brlab::tools;

int main(int argc, char** argv) {
  CLI::App app{"brlab: boundary reaction laboratory"};
  app.require_subcommand(1);
  RunOptions opts;

  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config, "scenario config (JSON)");
    sub->add_option("--out", opts.out, "output directory (default: $BRLAB_OUT, then the config)");
    sub->add_option("--workers", opts.workers, "parallel solves")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opts.seed, "random seed for calibration translates");
  };
  auto* solve_cmd = app.add_subcommand("solve", "solve the first epsilon of the config");
  auto* sweep_cmd = app.add_subcommand("sweep", "solve every epsilon of the config");
  auto* analyze_cmd = app.add_subcommand("analyze", "sweep and run the analysis suite");
  auto* validate_cmd = app.add_subcommand("validate", "exact-layer oracle battery");
  auto* report_cmd = app.add_subcommand("report", "summarize an existing report.json");
  for (auto* sub : {solve_cmd, sweep_cmd, analyze_cmd, validate_cmd, report_cmd}) add_common(sub);
  report_cmd->add_option("path", opts.report_path, "report file or output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve_cmd) return run_solve(opts, std::cout);
    if (*sweep_cmd) return run_sweep(opts, std::cout);
    if (*analyze_cmd) return run_analyze(opts, std::cout);
    if (*validate_cmd) return run_validate(opts, std::cout);
    if (*report_cmd) return run_report(opts, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ReportError& e) {
    std::cerr << "report error: " << e.what() << "\n";
    return kConfigError;
  } catch (const brlab::SolverError& e) {
    std::cerr << "solver failure at sweep " << e.sweep() << ": " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kConfigError;
}
