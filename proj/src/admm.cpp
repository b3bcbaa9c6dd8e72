#include "utmost/admm.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "utmost/spectral_prox.hpp"

namespace utmost {

void SolverConfig::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("solver.rho: must be > 0");
  if (max_outer < 1 || mm_x_max < 1 || mm_h_max < 1) {
    throw std::invalid_argument("solver: iteration caps must be >= 1");
  }
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0) || !(mm_x_tol > 0.0) ||
      !(mm_h_tol > 0.0)) {
    throw std::invalid_argument("solver: tolerances must be > 0");
  }
}

double x_subproblem_objective(const Matrix& y, const Matrix& r,
                              const Matrix& e_k, double rho, Criterion c) {
  return criterion_value(Matrix(y.transpose() * y), c) +
         0.5 * rho * (y.transpose() * r * y).trace() -
         (e_k.transpose() * y).trace();
}

double x_surrogate_objective(const Matrix& y, const Matrix& y_tau,
                             const Matrix& r, const Matrix& e_k, double rho,
                             Criterion c) {
  const double lmax = max_eig_psd(r);
  const Matrix r_tilde = r - lmax * Matrix::Identity(r.rows(), r.cols());
  const Matrix a = e_k - rho * r_tilde * y_tau;
  return criterion_value(Matrix(y.transpose() * y), c) +
         0.5 * rho * lmax * (y.transpose() * y).trace() -
         (a.transpose() * y).trace() -
         0.5 * rho * (y_tau.transpose() * r_tilde * y_tau).trace();
}

double h_subproblem_objective(const Matrix& h, const Matrix& phi,
                              const Matrix& c, double rho) {
  const Matrix ph = phi * h;
  return 0.5 * rho * ph.squaredNorm() + (c.transpose() * ph).trace();
}

namespace {

Vector prox_for(Criterion c, const ProxInput& input) {
  switch (c) {
    case Criterion::A:
      return prox_a(input);
    case Criterion::D:
      return prox_d(input);
    case Criterion::E:
      return prox_e(input);
  }
  throw std::logic_error("unknown criterion");
}

void check_finite(const Matrix& m, const char* what, int iteration) {
  if (!m.allFinite()) {
    std::ostringstream msg;
    msg << "solver abort: non-finite " << what << " at outer iteration "
        << iteration;
    throw SolverError(msg.str());
  }
}

}  // namespace

Matrix update_x(const SolverState& state, const SolverConfig& config,
                Criterion criterion, MmDiagnostics* diag) {
  const Matrix& r = state.r.r;
  const double rho = config.rho;
  const double lmax = state.r_fact.lambda_max;
  const Matrix r_tilde = r - lmax * Matrix::Identity(r.rows(), r.cols());
  const Matrix e_k = state.r_fact.sqrt * (state.g + rho * state.phi.phi * state.h);
  const bool majorizer_tight = r_tilde.cwiseAbs().maxCoeff() == 0.0;

  Matrix y = state.r_fact.inv_sqrt * state.x;
  double obj = x_subproblem_objective(y, r, e_k, rho, criterion);
  for (int tau = 0; tau < config.mm_x_max; ++tau) {
    const Matrix a = e_k - rho * r_tilde * y;
    ThinSvd svd = thin_svd(a);
    const Vector gammas =
        prox_for(criterion, ProxInput{svd.sigma, rho * lmax});
    y = svd.u * gammas.asDiagonal() * svd.v.transpose();
    const double obj_new = x_subproblem_objective(y, r, e_k, rho, criterion);
    if (diag) {
      ++diag->iterations;
      if (std::isfinite(obj_new) && std::isfinite(obj)) {
        diag->max_increase = std::max(diag->max_increase, obj_new - obj);
      }
    }
    const double decrease = obj - obj_new;
    obj = obj_new;
    // When R is a multiple of the identity the majorizer is exact and one
    // step solves the subproblem.
    if (majorizer_tight || decrease <= config.mm_x_tol * std::max(1.0, std::abs(obj))) {
      break;
    }
  }
  check_finite(y, "X-update iterate", state.iteration);
  return state.r_fact.sqrt * y;
}

Matrix update_h(const SolverState& state, const SolverConfig& config,
                int* degeneracy_events, MmDiagnostics* diag) {
  const double rho = config.rho;
  const Matrix c = state.g - rho * state.x;
  const Vector norms = state.spec.effective_row_norms();

  const auto normalized_rows = [&](const Matrix& b, const Matrix& previous) {
    Matrix h(b.rows(), b.cols());
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      const double len = b.row(i).norm();
      if (len > 0.0) {
        h.row(i) = -norms(i) * b.row(i) / len;
      } else {
        h.row(i) = previous.row(i);
        if (degeneracy_events) ++(*degeneracy_events);
      }
    }
    return h;
  };

  if (state.spec.kind != ModelKind::Tdoa) {
    // Phi is diagonal with positive entries, so its weighting does not
    // change the per-row minimizing direction.
    return normalized_rows(c, state.h);
  }

  const Matrix& k = state.phi.phi;
  const Matrix m_tilde =
      k.transpose() * k -
      state.lambda_max_m * Matrix::Identity(state.spec.m, state.spec.m);
  const Matrix ktc = k.transpose() * c;

  Matrix h = state.h;
  double obj = h_subproblem_objective(h, k, c, rho);
  for (int t = 0; t < config.mm_h_max; ++t) {
    const Matrix b = rho * m_tilde.transpose() * h + ktc;
    h = normalized_rows(b, h);
    const double obj_new = h_subproblem_objective(h, k, c, rho);
    if (diag) {
      ++diag->iterations;
      diag->max_increase = std::max(diag->max_increase, obj_new - obj);
    }
    const double decrease = obj - obj_new;
    obj = obj_new;
    if (decrease <= config.mm_h_tol * std::max(1.0, std::abs(obj))) break;
  }
  check_finite(h, "H-update iterate", state.iteration);
  return h;
}

Matrix update_g(const SolverState& state, const SolverConfig& config) {
  return state.g + config.rho * (state.phi.phi * state.h - state.x);
}

Matrix uniform_initial_orientation(int m, int n, const Vector& row_norms) {
  Matrix h = Matrix::Zero(m, n);
  for (int i = 0; i < m; ++i) {
    const int slot = i % (2 * n);
    const int axis = slot % n;
    const double sign = slot < n ? 1.0 : -1.0;
    const double norm = row_norms.size() ? row_norms(i) : 1.0;
    h(i, axis) = sign * norm;
  }
  return h;
}

Matrix random_initial_orientation(int m, int n, std::uint64_t seed,
                                  const Vector& row_norms) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix h(m, n);
  for (int i = 0; i < m; ++i) {
    Vector row(n);
    do {
      for (int j = 0; j < n; ++j) row(j) = normal(rng);
    } while (row.norm() == 0.0);
    const double norm = row_norms.size() ? row_norms(i) : 1.0;
    h.row(i) = norm * row.transpose() / row.norm();
  }
  return h;
}

PlacementResult solve(const ModelSpec& spec, const NoiseCovariance& r,
                      Criterion criterion, const SolverConfig& config) {
  spec.validate();
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  SolverState state;
  state.spec = spec;
  const MappingMatrix orig_phi = build_phi(spec);
  NoiseCovariance orig_r;
  if (spec.kind == ModelKind::Tdoa) {
    if (r.dim() == spec.m) {
      orig_r = tdoa_covariance(r, orig_phi);
    } else if (r.dim() == spec.m - 1) {
      orig_r = r;
    } else {
      throw std::invalid_argument(
          "noise: covariance dimension must be m or m-1 for TDOA");
    }
  } else {
    if (r.dim() != spec.m) {
      throw std::invalid_argument("noise: covariance dimension must be m");
    }
    orig_r = r;
  }

  // The argmin is invariant under Phi -> Phi/s and R -> R/(s^2 c): the FIM
  // just picks up a constant factor. Normalizing Phi to unit RMS row gain
  // and R to unit spectral norm puts every model on the same scale, so one
  // rho behaves the same for TOA (Phi = I) and RSS (Phi entries ~ 1/d_i).
  const Vector init_norms = spec.effective_row_norms();
  const Matrix h_ref = uniform_initial_orientation(spec.m, spec.n, init_norms);
  const double phi_scale =
      (orig_phi.phi * h_ref).norm() / std::max(1e-300, h_ref.norm());
  if (!(phi_scale > 0.0)) {
    throw std::invalid_argument("model: mapping matrix has zero gain");
  }
  const double r_scale = max_eig_psd(orig_r.r);
  state.phi.phi = orig_phi.phi / phi_scale;
  state.r.r = orig_r.r / r_scale;
  if (spec.kind == ModelKind::Tdoa) {
    state.lambda_max_m =
        max_eig_psd(Matrix(state.phi.phi.transpose() * state.phi.phi));
  }
  state.r_fact = factor_spd(state.r.r);

  const Vector& norms = init_norms;
  state.h = config.init == SolverConfig::Init::Uniform
                ? h_ref
                : random_initial_orientation(spec.m, spec.n, config.seed, norms);
  state.x = state.phi.phi * state.h;
  state.g = Matrix::Zero(state.x.rows(), state.x.cols());

  PlacementResult result;
  result.trace.reserve(static_cast<size_t>(config.max_outer));
  for (int k = 0; k < config.max_outer; ++k) {
    state.iteration = k;
    const Matrix x_prev = state.x;
    state.x = update_x(state, config, criterion, &result.mm_x);
    state.h = update_h(state, config, &result.degeneracy_events, &result.mm_h);
    state.g = update_g(state, config);
    check_finite(state.x, "X", k);
    check_finite(state.g, "G", k);

    // Residuals are stated for the model's Phi; the iterates live in the
    // normalized coordinates, so scale back (X_orig = phi_scale * X).
    const double primal =
        phi_scale * (state.phi.phi * state.h - state.x).norm();
    const double dual = config.rho * phi_scale * phi_scale *
                        (state.phi.phi.transpose() * (state.x - x_prev)).norm();
    const double obj = criterion_value(
        fim(OrientationMatrix{state.h, norms}, orig_phi, orig_r), criterion,
        &result.degenerate_fim);
    result.trace.push_back({k, obj, primal, dual});
    if (primal <= config.tol_primal && dual <= config.tol_dual) {
      result.termination = Termination::Converged;
      break;
    }
  }

  result.h_opt = OrientationMatrix{state.h, norms};
  result.objective = criterion_value(
      fim(result.h_opt, orig_phi, orig_r), criterion, &result.degenerate_fim);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

}  // namespace utmost
