#pragma once

#include "utmost/mat_util.hpp"

namespace utmost {

/// Per-singular-value scalar subproblem input: the singular values of
/// A_{k,tau} (descending) and rho * lambda_max(R).
struct ProxInput {
  Vector sigmas;
  double rho_lambda = 0.0;
};

struct EpigraphSolution {
  Vector thetas;
  double t = 0.0;
  double objective = 0.0;
};

/// A-optimality: each output is the positive root of
/// rho_lambda g^4 - sigma_i g^3 - 2 = 0.
Vector prox_a(const ProxInput& input);

/// D-optimality closed form (sigma + sqrt(sigma^2 + 8 rho_lambda)) /
/// (2 rho_lambda).
Vector prox_d(const ProxInput& input);

/// E-optimality: gammas sqrt(theta_i) from the epigraph program.
Vector prox_e(const ProxInput& input);

/// Full epigraph solution minimizing
/// t + (rho_lambda/2) sum theta_i - sum sigma_i sqrt(theta_i)
/// subject to 1/theta_i <= t.
EpigraphSolution solve_epigraph(const ProxInput& input);

/// Per-coordinate minimizer for fixed t: max((sigma/rho_lambda)^2, 1/t).
double epigraph_inner(double t, double sigma, double rho_lambda);

}  // namespace utmost
