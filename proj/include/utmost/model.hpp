#pragma once

#include <optional>
#include <vector>

#include "utmost/mat_util.hpp"

namespace utmost {

enum class ModelKind { Toa, Tdoa, Rss, Aoa };
enum class Criterion { A, D, E };

/// Localization model plus the parameters that determine the mapping matrix.
struct ModelSpec {
  ModelKind kind = ModelKind::Toa;
  int m = 0;  // sensor count, >= n + 1
  int n = 3;  // spatial dimension, 2 or 3
  int reference_index = 0;     // TDOA only
  Vector ranges;               // RSS/AOA only, m positive distances
  double path_loss = 2.0;      // RSS only, alpha > 0
  Vector row_norms;            // optional per-sensor radii, empty = all ones

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Per-row radii c_i, defaulting to ones.
  Vector effective_row_norms() const;
};

/// Model-dependent linear weighting: identity (TOA), differencing matrix K
/// (TDOA, shape (m-1) x m), inverse-range diagonal (RSS/AOA).
struct MappingMatrix {
  Matrix phi;
};

/// m x n matrix whose rows are sensor-to-target directions of norm c_i.
struct OrientationMatrix {
  Matrix h;

  OrientationMatrix() = default;
  /// Validates row norms against c_i (all ones when empty) to 1e-12.
  explicit OrientationMatrix(Matrix rows, const Vector& norms = Vector());
};

/// Symmetric positive definite measurement-noise covariance.
struct NoiseCovariance {
  Matrix r;

  NoiseCovariance() = default;
  /// Validates symmetry (1e-12) and strict positive definiteness.
  explicit NoiseCovariance(Matrix cov);

  Eigen::Index dim() const { return r.rows(); }
};

MappingMatrix build_phi(const ModelSpec& spec);

/// Forms K * Sigma * K^T from a per-sensor range-noise covariance of
/// dimension m and a TDOA mapping matrix.
NoiseCovariance tdoa_covariance(const NoiseCovariance& range_noise_cov,
                                const MappingMatrix& phi);

/// Unified Fisher information H^T Phi^T R^{-1} Phi H (model constants
/// dropped). Symmetric positive semidefinite.
Matrix fim(const OrientationMatrix& h, const MappingMatrix& phi,
           const NoiseCovariance& r);

/// A: trace(F^{-1}); D: ln det(F^{-1}); E: 1 / lambda_min(F).
/// A near-singular FIM yields +infinity and sets *degenerate when provided.
double criterion_value(const Matrix& fim, Criterion c,
                       bool* degenerate = nullptr);

/// Analytic optimum for R = upsilon^2 I, Phi = I, n = 3.
double theoretical_optimum(int m, double upsilon, Criterion c);

/// The multiplicative (A/E) or additive (D) factor restoring the per-model
/// constant dropped from the unified objective.
double model_scaled_objective(double unified, Criterion c,
                              const ModelSpec& spec);

struct RowAngles {
  double azimuth = 0.0;                 // atan2(y, x), in (-pi, pi]
  std::optional<double> elevation;      // asin(z / |h_i|), 3D only
};

/// Azimuth/elevation per row; azimuth is 0 at the poles by convention.
std::vector<RowAngles> orientation_to_angles(const OrientationMatrix& h);

}  // namespace utmost
