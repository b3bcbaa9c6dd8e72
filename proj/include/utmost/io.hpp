#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "utmost/admm.hpp"
#include "utmost/sim.hpp"

namespace utmost {

struct PlacementSpec {
  enum class Type { Optimal, Uniform, Random, Explicit };
  std::string name;
  Type type = Type::Uniform;
  std::uint64_t seed = 0;           // Random only
  Vector design_target;             // Optimal only; empty = origin
  std::vector<Vector> sensors;      // Explicit only
};

struct SimulateConfig {
  Vector target;
  double radius = 1.0;
  int trials = 1000;
  std::uint64_t seed = 0;
  double noise_stddev = 0.3;
  bool no_noise = false;
  GridSpec grid;
  std::vector<PlacementSpec> placements;
};

struct RunConfig {
  ModelSpec spec;
  Criterion criterion = Criterion::A;
  SolverConfig solver;
  NoiseCovariance noise;  // solver-side covariance (m, or m-1 for TDOA)
  std::optional<SimulateConfig> simulate;
};

/// Parses and validates a config file; throws std::invalid_argument with a
/// message naming the offending field.
RunConfig load_run_config(const std::string& path);

/// Result document: key-value JSON with every float at 17 significant digits.
void write_result(const std::string& path, const RunConfig& config,
                  const PlacementResult& result);

/// Reads the orientation rows back out of a result file.
OrientationMatrix read_result_orientation(const std::string& path,
                                          const Vector& row_norms = Vector());

/// CSV with header iter,objective,primal_residual,dual_residual.
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace);

void write_sim_report(const std::string& path, const RunConfig& config,
                      const std::vector<SimReport>& reports);

void write_per_trial_csv(const std::string& path,
                         const std::vector<SimReport>& reports);

/// Builds the simulation covariance (header noise when it is a full m-dim
/// matrix, otherwise noise_stddev^2 I).
NoiseCovariance simulation_noise(const RunConfig& config);

/// Expands placement specs into sensor sets, solving for the optimal ones.
std::vector<NamedPlacement> build_placements(const RunConfig& config);

SimScenario build_scenario(const RunConfig& config);

/// Runs the 15 Table-style sanity cells (m in {5,10,15,20,25} x {A,D,E},
/// R = I, n = 3) plus the H^T H = (m/3) I structure check. Prints one line
/// per cell; returns true iff every cell passes. `inject_offset` perturbs
/// the analytic reference of the first A cell (negative-control hook).
bool run_sanity(std::ostream& out, double tol_a, double tol_e,
                double inject_offset = 0.0);

}  // namespace utmost
