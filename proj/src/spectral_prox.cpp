#include "utmost/spectral_prox.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace utmost {

namespace {

void check_input(const ProxInput& input) {
  if (!(input.rho_lambda > 0.0)) {
    throw std::invalid_argument("prox: rho_lambda must be > 0");
  }
  for (Eigen::Index i = 0; i < input.sigmas.size(); ++i) {
    if (input.sigmas(i) < 0.0 ||
        (i > 0 && input.sigmas(i) > input.sigmas(i - 1))) {
      throw std::invalid_argument(
          "prox: sigmas must be nonnegative and descending");
    }
  }
}

// Golden-section search for a convex scalar function on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Vector prox_a(const ProxInput& input) {
  check_input(input);
  Vector out(input.sigmas.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = positive_quartic_root(input.rho_lambda, input.sigmas(i));
  }
  return out;
}

Vector prox_d(const ProxInput& input) {
  check_input(input);
  Vector out(input.sigmas.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double s = input.sigmas(i);
    out(i) = (s + std::sqrt(s * s + 8.0 * input.rho_lambda)) /
             (2.0 * input.rho_lambda);
  }
  return out;
}

double epigraph_inner(double t, double sigma, double rho_lambda) {
  if (!(t > 0.0)) throw std::invalid_argument("epigraph_inner: t must be > 0");
  const double root = sigma / rho_lambda;
  return std::max(root * root, 1.0 / t);
}

EpigraphSolution solve_epigraph(const ProxInput& input) {
  check_input(input);
  const Eigen::Index n = input.sigmas.size();
  const double rl = input.rho_lambda;

  const auto reduced = [&](double t) {
    double val = t;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double theta = epigraph_inner(t, input.sigmas(i), rl);
      val += 0.5 * rl * theta - input.sigmas(i) * std::sqrt(theta);
    }
    return val;
  };

  // Beyond t = sqrt(n rl / 2) the reduced function is strictly increasing,
  // so the minimizer is bracketed below that point.
  const double t_lo = 1e-8;
  const double t_hi = std::sqrt(0.5 * n * rl) + 1.0;

  EpigraphSolution sol;
  sol.t = golden_section_minimize(reduced, t_lo, t_hi);
  sol.thetas.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sol.thetas(i) = epigraph_inner(sol.t, input.sigmas(i), rl);
  }
  sol.objective = sol.t;
  for (Eigen::Index i = 0; i < n; ++i) {
    sol.objective +=
        0.5 * rl * sol.thetas(i) - input.sigmas(i) * std::sqrt(sol.thetas(i));
  }
  return sol;
}

Vector prox_e(const ProxInput& input) {
  return solve_epigraph(input).thetas.cwiseSqrt();
}

}  // namespace utmost
