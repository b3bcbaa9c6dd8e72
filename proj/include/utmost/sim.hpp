#pragma once

#include <string>
#include <vector>

#include "utmost/model.hpp"

namespace utmost {

struct GridSpec {
  Vector lower;   // per-axis lower bounds, meters
  Vector upper;   // per-axis upper bounds
  int resolution = 201;
  int gn_iters = 50;
  double gn_tol = 1e-10;

  void validate(int n) const;
};

struct SimScenario {
  Vector target;                 // true position, n-vector
  std::vector<Vector> sensors;   // m positions
  ModelSpec model;
  NoiseCovariance noise;  // m-dim (TOA/RSS; TDOA range-noise, differenced
                          // internally)
  int trials = 1000;
  std::uint64_t seed = 0;
  GridSpec grid;
  bool no_noise = false;

  void validate() const;
};

struct SimReport {
  std::string placement;
  double mse = 0.0;   // mean squared position error, m^2
  double bias = 0.0;  // norm of the mean error vector, m
  std::vector<Vector> estimates;
  double crlb_trace = 0.0;  // model CRLB trace at the true target
  int excluded = 0;         // trials dropped for non-finite likelihoods
};

struct NamedPlacement {
  std::string name;
  std::vector<Vector> sensors;
};

/// One noisy measurement vector drawn from the scenario's model at the true
/// target: TOA s = 2 g(p) + eta, TDOA s = K g(p) + K n, RSS
/// z = -alpha ln|p - r_i| + eta.
Vector generate_measurements(const SimScenario& scenario, Rng& rng);

/// Grid search over the negative log-likelihood quadratic form followed by
/// Gauss-Newton refinement; falls back to the grid argmin on divergence.
Vector mle_estimate(const Vector& measurements, const SimScenario& scenario);

/// Independent trials with per-trial RNG streams derived from the seed.
SimReport run_trials(const SimScenario& scenario, const std::string& name);

/// Runs the scenario once per placement, sharing the trial seeds.
std::vector<SimReport> run_monte_carlo(
    const SimScenario& scenario, const std::vector<NamedPlacement>& placements);

}  // namespace utmost
