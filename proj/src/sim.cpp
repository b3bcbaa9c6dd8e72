#include "utmost/sim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace utmost {

void GridSpec::validate(int n) const {
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("grid: bounds must match the dimension");
  }
  if (((upper - lower).array() <= 0.0).any()) {
    throw std::invalid_argument("grid: upper bounds must exceed lower bounds");
  }
  if (resolution < 3) {
    throw std::invalid_argument("grid.resolution: must be >= 3");
  }
  if (gn_iters < 0 || !(gn_tol > 0.0)) {
    throw std::invalid_argument("grid: invalid Gauss-Newton settings");
  }
}

void SimScenario::validate() const {
  if (target.size() != model.n) {
    throw std::invalid_argument("simulate.target: dimension mismatch");
  }
  if (static_cast<int>(sensors.size()) != model.m) {
    throw std::invalid_argument("simulate.sensors: expected m positions");
  }
  for (const Vector& r : sensors) {
    if (r.size() != model.n) {
      throw std::invalid_argument("simulate.sensors: dimension mismatch");
    }
    if ((target - r).norm() <= 1e-9) {
      throw std::invalid_argument(
          "simulate.sensors: sensor coincides with the target");
    }
  }
  if (trials < 1) {
    throw std::invalid_argument("simulate.trials: must be >= 1");
  }
  if (noise.dim() != model.m) {
    throw std::invalid_argument("simulate.noise: expected an m-dim covariance");
  }
  grid.validate(model.n);
}

namespace {

// Everything trial-independent: likelihood covariance, mapping, and the
// mean vectors precomputed on the search grid.
struct LikelihoodModel {
  ModelKind kind;
  double alpha = 2.0;
  std::vector<Vector> sensors;
  Matrix k;          // TDOA differencing matrix, empty otherwise
  Matrix r_inv;      // inverse of the likelihood covariance
  Matrix noise_chol; // Cholesky of the drawn-noise covariance (m-dim)

  Vector ranges(const Vector& p) const {
    Vector g(sensors.size());
    for (size_t i = 0; i < sensors.size(); ++i) g(i) = (p - sensors[i]).norm();
    return g;
  }

  Vector mean(const Vector& p) const {
    switch (kind) {
      case ModelKind::Toa:
        return 2.0 * ranges(p);
      case ModelKind::Tdoa:
        return k * ranges(p);
      case ModelKind::Rss:
        return -alpha * ranges(p).array().log().matrix();
      default:
        throw std::invalid_argument("simulate: AOA measurements not modeled");
    }
  }

  Matrix jacobian(const Vector& p) const {
    const Eigen::Index m = static_cast<Eigen::Index>(sensors.size());
    const Eigen::Index n = p.size();
    Matrix h(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vector d = p - sensors[static_cast<size_t>(i)];
      const double len = d.norm();
      switch (kind) {
        case ModelKind::Toa:
          h.row(i) = 2.0 * d.transpose() / len;
          break;
        case ModelKind::Tdoa:
          h.row(i) = d.transpose() / len;
          break;
        default:
          h.row(i) = -alpha * d.transpose() / (len * len);
          break;
      }
    }
    return kind == ModelKind::Tdoa ? Matrix(k * h) : h;
  }

  double nll(const Vector& p, const Vector& s) const {
    const Vector resid = mean(p) - s;
    return resid.dot(r_inv * resid);
  }
};

LikelihoodModel make_model(const SimScenario& sc) {
  LikelihoodModel lm;
  lm.kind = sc.model.kind;
  lm.alpha = sc.model.path_loss;
  lm.sensors = sc.sensors;
  lm.noise_chol = factor_spd(sc.noise.r).chol;
  Matrix r_like = sc.noise.r;
  if (sc.model.kind == ModelKind::Tdoa) {
    ModelSpec phi_spec = sc.model;
    phi_spec.ranges.resize(0);
    lm.k = build_phi(phi_spec).phi;
    r_like = lm.k * sc.noise.r * lm.k.transpose();
  }
  lm.r_inv = r_like.llt().solve(
      Matrix::Identity(r_like.rows(), r_like.cols()));
  return lm;
}

struct GridCache {
  std::vector<Vector> points;
  std::vector<Vector> means;
};

GridCache make_grid(const SimScenario& sc, const LikelihoodModel& lm) {
  const int n = sc.model.n;
  const int res = sc.grid.resolution;
  GridCache cache;
  cache.points.reserve(static_cast<size_t>(std::pow(res, n)));
  std::vector<int> idx(static_cast<size_t>(n), 0);
  while (true) {
    Vector p(n);
    for (int j = 0; j < n; ++j) {
      p(j) = sc.grid.lower(j) +
             idx[static_cast<size_t>(j)] *
                 (sc.grid.upper(j) - sc.grid.lower(j)) / (res - 1);
    }
    cache.points.push_back(p);
    cache.means.push_back(lm.mean(p));
    int axis = n - 1;
    while (axis >= 0 && ++idx[static_cast<size_t>(axis)] == res) {
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return cache;
}

Vector estimate_one(const Vector& s, const SimScenario& sc,
                    const LikelihoodModel& lm, const GridCache& grid) {
  // Grid argmin, lowest linear index on ties.
  size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < grid.points.size(); ++i) {
    const Vector resid = grid.means[i] - s;
    const double val = resid.dot(lm.r_inv * resid);
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  const Vector grid_argmin = grid.points[best];

  Vector p = grid_argmin;
  double obj = best_val;
  int rising = 0;
  for (int it = 0; it < sc.grid.gn_iters; ++it) {
    const Vector resid = lm.mean(p) - s;
    const Matrix j = lm.jacobian(p);
    const Matrix normal = j.transpose() * lm.r_inv * j;
    const Vector step = normal.llt().solve(j.transpose() * (lm.r_inv * resid));
    if (!step.allFinite()) return grid_argmin;
    p -= step;
    const double obj_new = lm.nll(p, s);
    rising = obj_new > obj ? rising + 1 : 0;
    if (rising >= 2) return grid_argmin;
    obj = obj_new;
    if (step.norm() <= sc.grid.gn_tol) break;
  }
  return p.allFinite() ? p : grid_argmin;
}

Rng trial_rng(std::uint64_t seed, int trial) {
  return Rng(seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1)));
}

}  // namespace

Vector generate_measurements(const SimScenario& scenario, Rng& rng) {
  const LikelihoodModel lm = make_model(scenario);
  Vector s = lm.mean(scenario.target);
  if (scenario.no_noise) return s;
  const Vector noise = sample_correlated_noise(lm.noise_chol, rng);
  if (scenario.model.kind == ModelKind::Tdoa) return s + lm.k * noise;
  return s + noise;
}

Vector mle_estimate(const Vector& measurements, const SimScenario& scenario) {
  scenario.validate();
  const LikelihoodModel lm = make_model(scenario);
  const GridCache grid = make_grid(scenario, lm);
  return estimate_one(measurements, scenario, lm, grid);
}

SimReport run_trials(const SimScenario& scenario, const std::string& name) {
  scenario.validate();
  const LikelihoodModel lm = make_model(scenario);
  const GridCache grid = make_grid(scenario, lm);

  SimReport report;
  report.placement = name;
  report.estimates.reserve(static_cast<size_t>(scenario.trials));

  // Model CRLB trace at the true target, per-model constants included.
  {
    Matrix h(scenario.model.m, scenario.model.n);
    Matrix d_inv = Matrix::Identity(scenario.model.m, scenario.model.m);
    for (int i = 0; i < scenario.model.m; ++i) {
      const Vector d = scenario.target - scenario.sensors[static_cast<size_t>(i)];
      h.row(i) = d.transpose() / d.norm();
      d_inv(i, i) = 1.0 / d.norm();
    }
    Matrix w;
    double scale = 1.0;
    switch (scenario.model.kind) {
      case ModelKind::Toa:
        w = h;
        scale = 4.0;
        break;
      case ModelKind::Tdoa:
        w = lm.k * h;
        break;
      default:
        w = d_inv * h;
        scale = lm.alpha * lm.alpha;
        break;
    }
    const Matrix f = scale * w.transpose() * lm.r_inv * w;
    report.crlb_trace = criterion_value(f, Criterion::A);
  }

  Vector err_sum = Vector::Zero(scenario.model.n);
  double sq_sum = 0.0;
  int used = 0;
  for (int trial = 0; trial < scenario.trials; ++trial) {
    Rng rng = trial_rng(scenario.seed, trial);
    Vector s = lm.mean(scenario.target);
    if (!scenario.no_noise) {
      const Vector noise = sample_correlated_noise(lm.noise_chol, rng);
      s += scenario.model.kind == ModelKind::Tdoa ? Vector(lm.k * noise) : noise;
    }
    const double check = s.dot(lm.r_inv * s);
    if (!s.allFinite() || !std::isfinite(check)) {
      ++report.excluded;
      continue;
    }
    const Vector p_hat = estimate_one(s, scenario, lm, grid);
    if (!p_hat.allFinite()) {
      ++report.excluded;
      continue;
    }
    const Vector err = p_hat - scenario.target;
    err_sum += err;
    sq_sum += err.squaredNorm();
    ++used;
    report.estimates.push_back(p_hat);
  }
  if (used == 0) {
    throw std::runtime_error("simulate: all trials excluded for placement '" +
                             name + "'");
  }
  report.mse = sq_sum / used;
  report.bias = (err_sum / used).norm();
  return report;
}

std::vector<SimReport> run_monte_carlo(
    const SimScenario& scenario,
    const std::vector<NamedPlacement>& placements) {
  std::vector<SimReport> reports;
  reports.reserve(placements.size());
  for (const NamedPlacement& placement : placements) {
    SimScenario sc = scenario;
    sc.sensors = placement.sensors;
    reports.push_back(run_trials(sc, placement.name));
  }
  return reports;
}

}  // namespace utmost
