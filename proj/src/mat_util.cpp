#include "utmost/mat_util.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace utmost {

namespace {

void check_symmetric(const Matrix& r, const char* who) {
  if (r.rows() != r.cols()) {
    throw std::invalid_argument(std::string(who) + ": matrix not square");
  }
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  const double asym = (r - r.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
  }
}

}  // namespace

SpdFactorization factor_spd(const Matrix& r) {
  check_symmetric(r, "factor_spd");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (r + r.transpose())));
  const Vector& ev = es.eigenvalues();  // ascending
  const Matrix& q = es.eigenvectors();
  const double lmax = ev(ev.size() - 1);
  const double lmin = ev(0);
  if (lmin <= 1e-12 * std::max(lmax, 0.0)) {
    std::ostringstream msg;
    msg << "factor_spd: matrix not positive definite (eigenvalue " << lmin
        << ")";
    throw std::invalid_argument(msg.str());
  }
  SpdFactorization f;
  f.sqrt = q * ev.cwiseSqrt().asDiagonal() * q.transpose();
  f.inv_sqrt = q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  f.lambda_max = lmax;
  f.chol = Matrix(r.llt().matrixL());
  return f;
}

ThinSvd thin_svd(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw std::invalid_argument("thin_svd: requires rows >= cols");
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Eigen::Index j = 0; j < out.v.cols(); ++j) {
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < out.v.rows(); ++i) {
      if (std::abs(out.v(i, j)) > std::abs(out.v(pivot, j))) pivot = i;
    }
    if (out.v(pivot, j) < 0.0) {
      out.v.col(j) = -out.v.col(j);
      out.u.col(j) = -out.u.col(j);
    }
  }
  return out;
}

double max_eig_psd(const Matrix& a) {
  check_symmetric(a, "max_eig_psd");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (a + a.transpose())),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(a.rows() - 1);
}

double positive_quartic_root(double rho_lambda, double sigma) {
  if (!(rho_lambda > 0.0) || sigma < 0.0) {
    throw std::invalid_argument("positive_quartic_root: invalid domain");
  }
  const auto p = [&](double g) {
    return rho_lambda * g * g * g * g - sigma * g * g * g - 2.0;
  };
  const auto dp = [&](double g) {
    return 4.0 * rho_lambda * g * g * g - 3.0 * sigma * g * g;
  };
  // One sign change: p(0) = -2 and the quartic term dominates eventually.
  const double base = std::pow(2.0 / rho_lambda, 0.25);
  double lo = std::min(1.0, base);
  while (p(lo) > 0.0) lo *= 0.5;
  double hi = std::max(1.0, sigma / rho_lambda + base);
  while (p(hi) < 0.0) hi *= 2.0;

  double g = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = p(g);
    if (f > 0.0) {
      hi = g;
    } else {
      lo = g;
    }
    const double d = dp(g);
    double next = (d != 0.0) ? g - f / d : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - g) <= 1e-16 * std::max(1.0, g)) {
      g = next;
      break;
    }
    g = next;
  }
  return g;
}

Vector sample_correlated_noise(const Matrix& chol, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(chol.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return chol.triangularView<Eigen::Lower>() * z;
}

}  // namespace utmost
