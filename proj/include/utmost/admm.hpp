#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "utmost/model.hpp"

namespace utmost {

struct SolverConfig {
  enum class Init { Uniform, RandomSeeded };

  double rho = 1.0;
  int max_outer = 5000;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  int mm_x_max = 100;
  double mm_x_tol = 1e-10;
  int mm_h_max = 100;
  double mm_h_tol = 1e-10;
  Init init = Init::Uniform;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Thrown when the solver encounters non-finite iterates.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverState {
  ModelSpec spec;
  MappingMatrix phi;
  NoiseCovariance r;        // dimension matching the rows of phi
  SpdFactorization r_fact;  // cached once per solve
  double lambda_max_m = 0;  // lambda_max(K^T K), TDOA only
  Matrix x;                 // (rows of phi) x n
  Matrix g;                 // multiplier, same shape as x
  Matrix h;                 // m x n, rows of norm c_i
  int iteration = 0;
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

enum class Termination { Converged, MaxIterations };

struct MmDiagnostics {
  double max_increase = 0.0;  // largest inner-objective increase observed
  int iterations = 0;
};

struct PlacementResult {
  OrientationMatrix h_opt;
  double objective = 0.0;
  std::vector<TraceRecord> trace;
  Termination termination = Termination::MaxIterations;
  double wall_time = 0.0;
  int degeneracy_events = 0;   // zero-direction rows kept unchanged
  bool degenerate_fim = false;  // FIM singular at termination
  MmDiagnostics mm_x;          // aggregated over all outer iterations
  MmDiagnostics mm_h;
};

/// MM loop for the X-subproblem (criterion-specific spectral prox).
Matrix update_x(const SolverState& state, const SolverConfig& config,
                Criterion criterion, MmDiagnostics* diag = nullptr);

/// Closed-form row normalization (TOA/RSS/AOA) or the TDOA MM loop.
Matrix update_h(const SolverState& state, const SolverConfig& config,
                int* degeneracy_events = nullptr,
                MmDiagnostics* diag = nullptr);

/// Dual ascent G + rho (Phi H - X).
Matrix update_g(const SolverState& state, const SolverConfig& config);

/// The full outer loop. For TDOA, an m-dimensional noise covariance is
/// treated as the per-sensor range-noise covariance and differenced to
/// K Sigma K^T; an (m-1)-dimensional one is used as-is.
PlacementResult solve(const ModelSpec& spec, const NoiseCovariance& r,
                      Criterion criterion, const SolverConfig& config);

/// Exact X-subproblem objective f((Y^T Y)^{-1}) + (rho/2) Tr(Y^T R Y)
/// - Tr(E_k^T Y).
double x_subproblem_objective(const Matrix& y, const Matrix& r,
                              const Matrix& e_k, double rho, Criterion c);

/// The majorizer of the X-subproblem objective anchored at y_tau. Tight at
/// y = y_tau and dominating everywhere.
double x_surrogate_objective(const Matrix& y, const Matrix& y_tau,
                             const Matrix& r, const Matrix& e_k, double rho,
                             Criterion c);

/// H-subproblem objective (rho/2) Tr(H^T Phi^T Phi H) + Tr(C^T Phi H), the
/// H-dependent part of the augmented Lagrangian.
double h_subproblem_objective(const Matrix& h, const Matrix& phi,
                              const Matrix& c, double rho);

/// The +/- coordinate-axis pattern, repeated cyclically, rows of norm c_i.
Matrix uniform_initial_orientation(int m, int n,
                                   const Vector& row_norms = Vector());

/// Rows drawn uniformly on the sphere, scaled to norm c_i.
Matrix random_initial_orientation(int m, int n, std::uint64_t seed,
                                  const Vector& row_norms = Vector());

}  // namespace utmost
