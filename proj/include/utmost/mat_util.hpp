#pragma once

#include <Eigen/Dense>
#include <random>

namespace utmost {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Spectral factorization of a symmetric positive definite matrix.
/// Holds everything the solver needs per covariance: the symmetric square
/// root and its inverse, the maximum eigenvalue, and a Cholesky factor for
/// correlated-noise sampling.
struct SpdFactorization {
  Matrix sqrt;      // R^{1/2}, symmetric
  Matrix inv_sqrt;  // R^{-1/2}, symmetric
  double lambda_max = 0.0;
  Matrix chol;      // lower triangular, chol * chol^T = R

  Eigen::Index dim() const { return sqrt.rows(); }
};

/// Factorizes a symmetric positive definite matrix via its eigendecomposition.
/// Throws std::invalid_argument if the input is not symmetric or if the
/// smallest eigenvalue is <= 1e-12 times the largest.
SpdFactorization factor_spd(const Matrix& r);

/// Thin SVD a = u * sigma.asDiagonal() * v^T with descending singular values.
struct ThinSvd {
  Matrix u;      // m x n, orthonormal columns
  Vector sigma;  // n, descending, nonnegative
  Matrix v;      // n x n, orthogonal
};

/// Thin SVD with a fixed sign convention: in each column of v the entry of
/// largest magnitude (lowest index on ties) is nonnegative. Requires
/// rows >= cols. Deterministic for deterministic input.
ThinSvd thin_svd(const Matrix& a);

/// Largest eigenvalue of a symmetric matrix.
double max_eig_psd(const Matrix& a);

/// The unique positive root of rho_lambda * g^4 - sigma * g^3 - 2 = 0,
/// found by safeguarded Newton on a sign-change bracket.
double positive_quartic_root(double rho_lambda, double sigma);

/// Draws L * z with z i.i.d. standard normal from the given stream.
Vector sample_correlated_noise(const Matrix& chol, Rng& rng);

}  // namespace utmost
