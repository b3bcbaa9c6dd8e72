#include <random>

#include "doctest.h"
#include "utmost/mat_util.hpp"

using namespace utmost;

namespace {

Matrix random_spd(int m, Rng& rng, double ridge = 0.5) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = normal(rng);
  return Matrix(a * a.transpose() + ridge * Matrix::Identity(m, m));
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = normal(rng);
  return a;
}

Matrix correlated_r6() {
  Matrix r(6, 6);
  r << 4.88, 3.07, -1.73, 1.90, 2.63, -1.61,
       3.07, 11.72, -3.51, 4.48, 3.95, 0.24,
       -1.73, -3.51, 21.82, -1.20, 0.49, -4.74,
       1.90, 4.48, -1.20, 3.63, 3.71, 1.00,
       2.63, 3.95, 0.49, 3.71, 8.45, 0.56,
       -1.61, 0.24, -4.74, 1.00, 0.56, 4.22;
  return r;
}

double quartic(double rho_lambda, double sigma, double g) {
  return rho_lambda * g * g * g * g - sigma * g * g * g - 2.0;
}

// Independent root finder: plain bisection on the quartic.
double bisect_quartic(double rho_lambda, double sigma) {
  double lo = 1e-12, hi = 1.0;
  while (quartic(rho_lambda, sigma, hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (quartic(rho_lambda, sigma, mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("factor_spd scalar multiples of the identity") {
  const SpdFactorization f = factor_spd(Matrix(4.0 * Matrix::Identity(3, 3)));
  CHECK((f.sqrt - 2.0 * Matrix::Identity(3, 3)).norm() < 1e-12);
  CHECK(f.lambda_max == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("factor_spd 2x2 with known spectrum") {
  Matrix r(2, 2);
  r << 2, 1, 1, 2;
  const SpdFactorization f = factor_spd(r);
  CHECK(f.lambda_max == doctest::Approx(3.0).epsilon(1e-12));
  CHECK((f.sqrt * f.sqrt - r).norm() < 1e-10 * r.norm());
  CHECK((f.sqrt * f.inv_sqrt - Matrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("factor_spd on the 6x6 correlated covariance") {
  const Matrix r = correlated_r6();
  const SpdFactorization f = factor_spd(r);
  CHECK((f.sqrt * f.sqrt - r).norm() < 1e-10 * r.norm());
  CHECK((Matrix(f.chol * f.chol.transpose()) - r).norm() < 1e-10 * r.norm());
  // lambda_max dominates every sampled Rayleigh quotient.
  Rng rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Vector v(6);
    for (int i = 0; i < 6; ++i) v(i) = normal(rng);
    v.normalize();
    CHECK(f.lambda_max >= v.dot(r * v) - 1e-10);
  }
}

TEST_CASE("factor_spd round-trips 100 seeded SPD matrices of dims 2-12") {
  Rng rng(11);
  std::uniform_int_distribution<int> dim(2, 12);
  for (int k = 0; k < 100; ++k) {
    const Matrix r = random_spd(dim(rng), rng);
    const SpdFactorization f = factor_spd(r);
    CHECK((f.sqrt * f.sqrt - r).norm() < 1e-10 * r.norm());
    CHECK((f.sqrt * f.inv_sqrt - Matrix::Identity(r.rows(), r.cols())).norm() <
          1e-9);
  }
}

TEST_CASE("factor_spd rejects bad inputs") {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(factor_spd(asym), std::invalid_argument);

  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(factor_spd(singular),
                       doctest::Contains("not positive definite"),
                       std::invalid_argument);
}

TEST_CASE("thin_svd diagonal embedding and zero matrix") {
  Matrix a = Matrix::Zero(3, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 2.0;
  ThinSvd svd = thin_svd(a);
  CHECK(svd.sigma(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(svd.sigma(1) == doctest::Approx(2.0).epsilon(1e-14));

  ThinSvd zero = thin_svd(Matrix(Matrix::Zero(4, 3)));
  CHECK(zero.sigma.norm() == 0.0);
}

TEST_CASE("thin_svd reconstruction, ordering, and sign convention") {
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const Matrix a = random_matrix(6, 3, rng);
    ThinSvd svd = thin_svd(a);
    CHECK((svd.u * svd.sigma.asDiagonal() * svd.v.transpose() - a).norm() <
          1e-10 * a.norm());
    for (int i = 0; i + 1 < svd.sigma.size(); ++i) {
      CHECK(svd.sigma(i) >= svd.sigma(i + 1));
    }
    for (int j = 0; j < svd.v.cols(); ++j) {
      Eigen::Index imax = 0;
      svd.v.col(j).cwiseAbs().maxCoeff(&imax);
      CHECK(svd.v(imax, j) >= 0.0);
    }
  }
}

TEST_CASE("thin_svd is deterministic") {
  Rng rng(5);
  const Matrix a = random_matrix(5, 2, rng);
  ThinSvd s1 = thin_svd(a);
  ThinSvd s2 = thin_svd(a);
  CHECK(s1.u == s2.u);
  CHECK(s1.sigma == s2.sigma);
  CHECK(s1.v == s2.v);
}

TEST_CASE("max_eig_psd known spectra") {
  Vector d(2);
  d << 1, 5;
  CHECK(max_eig_psd(Matrix(d.asDiagonal())) == doctest::Approx(5.0));
}

TEST_CASE("max_eig_psd of K^T K and the all-ones matrix") {
  const int m = 5;
  Matrix k = Matrix::Zero(m - 1, m);
  for (int i = 0; i < m - 1; ++i) {
    k(i, 0) = -1.0;
    k(i, i + 1) = 1.0;
  }
  const Matrix ktk = k.transpose() * k;
  // Oracle: full eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Matrix> es(ktk);
  CHECK(max_eig_psd(ktk) ==
        doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-10));
  CHECK(max_eig_psd(ktk) == doctest::Approx(double(m)).epsilon(1e-10));

  CHECK(max_eig_psd(Matrix(Matrix::Ones(4, 4))) ==
        doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("positive_quartic_root pinned values and bisection oracle") {
  CHECK(positive_quartic_root(2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(positive_quartic_root(1.0, 1.0) ==
        doctest::Approx(bisect_quartic(1.0, 1.0)).epsilon(1e-10));
  CHECK(positive_quartic_root(1.0, 1.0) == doctest::Approx(1.5437).epsilon(1e-4));
  CHECK(positive_quartic_root(1.0, 10.0) ==
        doctest::Approx(bisect_quartic(1.0, 10.0)).epsilon(1e-10));
  CHECK(positive_quartic_root(1.0, 10.0) ==
        doctest::Approx(10.0020).epsilon(1e-4));
}

TEST_CASE("positive_quartic_root residual bound and grid-argmin property") {
  Rng rng(13);
  std::uniform_real_distribution<double> rl(0.05, 5.0), sg(0.0, 10.0);
  for (int k = 0; k < 50; ++k) {
    const double rho_lambda = rl(rng);
    const double sigma = sg(rng);
    const double g = positive_quartic_root(rho_lambda, sigma);
    CHECK(std::abs(quartic(rho_lambda, sigma, g)) <=
          1e-12 * std::max(1.0, sigma * g * g * g));
    // The root minimizes phi(g) = g^-2 + (rl/2)g^2 - sigma*g over g > 0.
    const auto phi = [&](double x) {
      return 1.0 / (x * x) + 0.5 * rho_lambda * x * x - sigma * x;
    };
    double best = phi(g);
    for (double x = 1e-4; x < g + 5.0; x += 1e-4) {
      CHECK(phi(x) >= best - 1e-7);
    }
  }
}

TEST_CASE("sample_correlated_noise identity and scaling") {
  const SpdFactorization fi = factor_spd(Matrix(Matrix::Identity(3, 3)));
  const SpdFactorization f4 = factor_spd(Matrix(4.0 * Matrix::Identity(3, 3)));
  Rng a(42), b(42), c(42);
  const Vector raw = [&] {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(3);
    for (int i = 0; i < 3; ++i) v(i) = normal(a);
    return v;
  }();
  const Vector draw_i = sample_correlated_noise(fi.chol, b);
  const Vector draw_4 = sample_correlated_noise(f4.chol, c);
  CHECK((draw_i - raw).norm() < 1e-14);
  CHECK((draw_4 - 2.0 * draw_i).norm() < 1e-14);
}

TEST_CASE("sample_correlated_noise empirical covariance of a correlated matrix") {
  const Matrix r = correlated_r6();
  const SpdFactorization f = factor_spd(r);
  Rng rng(99);
  Matrix acc = Matrix::Zero(6, 6);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const Vector v = sample_correlated_noise(f.chol, rng);
    acc += v * v.transpose();
  }
  acc /= double(draws);
  CHECK((acc - r).norm() < 0.05 * r.norm());
}
