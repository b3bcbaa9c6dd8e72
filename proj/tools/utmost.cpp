#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "utmost/admm.hpp"
#include "utmost/io.hpp"
#include "utmost/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolverAbort = 2;
constexpr int kExitSanityFail = 3;

int run_solve(const std::string& config_path, const std::string& out_path,
              const std::string& trace_path) {
  utmost::RunConfig config;
  try {
    config = utmost::load_run_config(config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  utmost::PlacementResult result;
  try {
    result = utmost::solve(config.spec, config.noise, config.criterion,
                           config.solver);
  } catch (const utmost::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolverAbort;
  }
  utmost::write_result(out_path, config, result);
  if (!trace_path.empty()) utmost::write_trace_csv(trace_path, result.trace);
  std::cout << "objective (unified): " << result.objective << "\n";
  std::cout << "objective (model-scaled): "
            << utmost::model_scaled_objective(result.objective,
                                              config.criterion, config.spec)
            << "\n";
  std::cout << "iterations: " << result.trace.size() << " ("
            << (result.termination == utmost::Termination::Converged
                    ? "converged"
                    : "max iterations")
            << ")\n";
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& per_trial_path) {
  utmost::RunConfig config;
  utmost::SimScenario scenario;
  std::vector<utmost::NamedPlacement> placements;
  try {
    config = utmost::load_run_config(config_path);
    scenario = utmost::build_scenario(config);
    placements = utmost::build_placements(config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const utmost::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolverAbort;
  }
  const std::vector<utmost::SimReport> reports =
      utmost::run_monte_carlo(scenario, placements);
  utmost::write_sim_report(out_path, config, reports);
  if (!per_trial_path.empty()) {
    utmost::write_per_trial_csv(per_trial_path, reports);
  }
  for (const utmost::SimReport& r : reports) {
    std::cout << r.placement << ": mse=" << r.mse << " bias=" << r.bias
              << " crlb_trace=" << r.crlb_trace << " excluded=" << r.excluded
              << "\n";
  }
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor-orientation design for source localization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string trace_path;
  std::string per_trial_path;
  double tol_a = 1e-3;
  double tol_e = 5e-3;
  double inject = 0.0;

  CLI::App* solve = app.add_subcommand("solve", "Optimize an orientation matrix");
  solve->add_option("--config", config_path, "Config JSON path")->required();
  solve->add_option("--out", out_path, "Result JSON path")->required();
  solve->add_option("--trace", trace_path, "Per-iteration trace CSV path");

  CLI::App* sanity =
      app.add_subcommand("sanity", "Check identity-noise TOA cells against "
                                   "their analytic optima");
  sanity->add_option("--tol-a", tol_a, "Tolerance for A/D cells");
  sanity->add_option("--tol-e", tol_e, "Tolerance for E cells");
  sanity->add_option("--inject-offset", inject,
                     "Perturb one analytic reference (self-test hook)")
      ->group("");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte-Carlo MLE comparison across "
                                     "sensor placements");
  simulate->add_option("--config", config_path, "Config JSON path")->required();
  simulate->add_option("--out", out_path, "Report JSON path")->required();
  simulate->add_option("--per-trial", per_trial_path,
                       "Per-trial estimates CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(config_path, out_path, trace_path);
    if (sanity->parsed()) {
      return utmost::run_sanity(std::cout, tol_a, tol_e, inject)
                 ? kExitOk
                 : kExitSanityFail;
    }
    if (simulate->parsed()) {
      return run_simulate(config_path, out_path, per_trial_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverAbort;
  }
  return kExitOk;
}
