#include "utmost/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace utmost {

void ModelSpec::validate() const {
  if (n != 2 && n != 3) {
    throw std::invalid_argument("n: spatial dimension must be 2 or 3");
  }
  if (m < n + 1) {
    throw std::invalid_argument("m: sensor count must be >= n + 1");
  }
  const bool wants_ranges = kind == ModelKind::Rss || kind == ModelKind::Aoa;
  if (wants_ranges) {
    if (ranges.size() != m) {
      throw std::invalid_argument("ranges: expected m positive ranges");
    }
    if ((ranges.array() <= 0.0).any()) {
      throw std::invalid_argument("ranges: all ranges must be > 0");
    }
  } else if (ranges.size() != 0) {
    throw std::invalid_argument("ranges: only valid for RSS/AOA");
  }
  if (kind == ModelKind::Tdoa) {
    if (reference_index < 0 || reference_index >= m) {
      throw std::invalid_argument("reference_index: out of range");
    }
  }
  if (kind == ModelKind::Rss && !(path_loss > 0.0)) {
    throw std::invalid_argument("path_loss: must be > 0");
  }
  if (row_norms.size() != 0) {
    if (row_norms.size() != m) {
      throw std::invalid_argument("row_norms: expected m entries");
    }
    if ((row_norms.array() <= 0.0).any()) {
      throw std::invalid_argument("row_norms: all radii must be > 0");
    }
  }
}

Vector ModelSpec::effective_row_norms() const {
  if (row_norms.size() == m) return row_norms;
  return Vector::Ones(m);
}

OrientationMatrix::OrientationMatrix(Matrix rows, const Vector& norms)
    : h(std::move(rows)) {
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const double want = norms.size() ? norms(i) : 1.0;
    if (std::abs(h.row(i).norm() - want) > 1e-12 * std::max(1.0, want)) {
      std::ostringstream msg;
      msg << "orientation row " << i << " has norm " << h.row(i).norm()
          << ", expected " << want;
      throw std::invalid_argument(msg.str());
    }
  }
}

NoiseCovariance::NoiseCovariance(Matrix cov) : r(std::move(cov)) {
  factor_spd(r);  // rejects asymmetric or non-PD input
}

MappingMatrix build_phi(const ModelSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ModelKind::Toa:
      return {Matrix::Identity(spec.m, spec.m)};
    case ModelKind::Rss:
    case ModelKind::Aoa:
      return {Matrix(spec.ranges.cwiseInverse().asDiagonal())};
    case ModelKind::Tdoa: {
      Matrix k = Matrix::Zero(spec.m - 1, spec.m);
      int row = 0;
      for (int i = 0; i < spec.m; ++i) {
        if (i == spec.reference_index) continue;
        k(row, spec.reference_index) = -1.0;
        k(row, i) = 1.0;
        ++row;
      }
      return {k};
    }
  }
  throw std::logic_error("build_phi: unknown model kind");
}

NoiseCovariance tdoa_covariance(const NoiseCovariance& range_noise_cov,
                                const MappingMatrix& phi) {
  if (phi.phi.cols() != range_noise_cov.dim()) {
    throw std::invalid_argument(
        "tdoa_covariance: dimension mismatch between mapping and covariance");
  }
  Matrix out = phi.phi * range_noise_cov.r * phi.phi.transpose();
  return NoiseCovariance(Matrix(0.5 * (out + out.transpose())));
}

Matrix fim(const OrientationMatrix& h, const MappingMatrix& phi,
           const NoiseCovariance& r) {
  if (phi.phi.cols() != h.h.rows() || phi.phi.rows() != r.dim()) {
    throw std::invalid_argument("fim: inconsistent dimensions");
  }
  const Matrix w = phi.phi * h.h;
  const Matrix f = w.transpose() * r.r.llt().solve(w);
  return 0.5 * (f + f.transpose());
}

double criterion_value(const Matrix& f, Criterion c, bool* degenerate) {
  if (degenerate) *degenerate = false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (f + f.transpose())),
                                           Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double lmax = ev(ev.size() - 1);
  const double lmin = ev(0);
  if (!(lmin > 1e-14 * std::max(lmax, 0.0)) || !(lmax > 0.0)) {
    if (degenerate) *degenerate = true;
    return std::numeric_limits<double>::infinity();
  }
  switch (c) {
    case Criterion::A:
      return ev.cwiseInverse().sum();
    case Criterion::D:
      return -ev.array().log().sum();
    case Criterion::E:
      return 1.0 / lmin;
  }
  throw std::logic_error("criterion_value: unknown criterion");
}

double theoretical_optimum(int m, double upsilon, Criterion c) {
  // H*^T H* = (m/3) I_3 with R = upsilon^2 I gives F = (m / (3 upsilon^2)) I.
  const double u2 = upsilon * upsilon;
  switch (c) {
    case Criterion::A:
      return 9.0 * u2 / m;
    case Criterion::D:
      return 3.0 * std::log(3.0 * u2 / m);
    case Criterion::E:
      return 3.0 * u2 / m;
  }
  throw std::logic_error("theoretical_optimum: unknown criterion");
}

double model_scaled_objective(double unified, Criterion c,
                              const ModelSpec& spec) {
  double scale = 1.0;  // factor multiplying the model FIM vs the unified one
  if (spec.kind == ModelKind::Toa) scale = 4.0;
  if (spec.kind == ModelKind::Rss) scale = spec.path_loss * spec.path_loss;
  if (c == Criterion::D) return unified - spec.n * std::log(scale);
  return unified / scale;
}

std::vector<RowAngles> orientation_to_angles(const OrientationMatrix& h) {
  std::vector<RowAngles> out;
  out.reserve(static_cast<size_t>(h.h.rows()));
  for (Eigen::Index i = 0; i < h.h.rows(); ++i) {
    const double norm = h.h.row(i).norm();
    if (!(norm > 0.0)) {
      std::ostringstream msg;
      msg << "orientation_to_angles: zero row " << i;
      throw std::invalid_argument(msg.str());
    }
    RowAngles a;
    const double x = h.h(i, 0);
    const double y = h.h(i, 1);
    if (h.h.cols() == 3) {
      const double z = h.h(i, 2);
      a.azimuth = (x == 0.0 && y == 0.0) ? 0.0 : std::atan2(y, x);
      a.elevation = std::asin(z / norm);
    } else {
      a.azimuth = std::atan2(y, x);
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace utmost
