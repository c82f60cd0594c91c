#include "seqci/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqci/errors.hpp"
#include "seqci/special_functions.hpp"

namespace seqci::bounds {

namespace {

void check_a_h(double a, double h) {
  if (!(a > 0.0)) throw DomainError("prior shape a must be positive");
  if (!(h > 0.0 && h < 0.5)) throw DomainError("half-width must lie in (0, 0.5)");
}

// ceil() that ignores rounding noise just above an integer.
double ceil_clean(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
  return std::ceil(x);
}

double floor_clean(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
  return std::floor(x);
}

}  // namespace

BetaFractionalParts fractional_parts(double a) {
  if (!(a > 0.0)) throw DomainError("prior shape a must be positive");
  const double whole = std::floor(a);
  if (whole == a) return {static_cast<int>(a) - 1, 1.0};
  return {static_cast<int>(whole), a - whole};
}

double chernoff_upper(int t, double a, double h) {
  check_a_h(a, h);
  if (t < 0) throw DomainError("t must be nonnegative");
  return 2.0 * std::exp(-2.0 * h * h * (t + 2.0 * a + 1.0));
}

double incbeta_lower(int t, double a, double h) {
  check_a_h(a, h);
  if (t < 1) throw DomainError("incbeta_lower requires t >= 1");
  const auto [n_a, delta] = fractional_parts(a);
  const double log_bound = std::log(2.0) + delta * std::log(0.25 - h * h) +
                           (t + 2.0 * n_a) * std::log(0.5 - h) -
                           std::log(t + 2.0 * n_a + 2.0 * delta) - log_gamma(delta);
  return std::exp(log_bound);
}

SigmaBound chebyshev_sigma_bound(int t, double p, double q) {
  if (t < 0) throw DomainError("t must be nonnegative");
  BetaParams checked(p, q);
  const double n = t + p + q;
  double best = 0.0;
  // The variance is concave in s; scanning is cheap and exact.
  for (int s = 0; s <= t; ++s) best = std::max(best, (p + s) * (t - s + q) / (n * n * (n + 1.0)));
  return {best, 1.0 / (4.0 * (n + 1.0))};
}

long long crude_horizon_bound(double c, double a, double h) {
  check_a_h(a, h);
  if (!(c > 0.0)) throw DomainError("crude_horizon_bound requires c > 0");
  const double x = 1.0 / (4.0 * h * h * c) - 2.0 * a - 1.0;
  return static_cast<long long>(ceil_clean(std::max(0.0, x)));
}

int log_horizon(double c, double a, double h) {
  check_a_h(a, h);
  if (!(c > 0.0 && c <= 1.0)) throw DomainError("log_horizon requires 0 < c <= 1");
  const double x = (std::abs(std::log(c)) + std::log(2.0)) / (2.0 * h * h) - 2.0 * a - 1.0;
  return static_cast<int>(ceil_clean(std::max(0.0, x)));
}

int log_lower_limit(double c, double a, double h, int horizon) {
  check_a_h(a, h);
  if (!(c > 0.0)) throw DomainError("log_lower_limit requires c > 0");
  const auto [n_a, delta] = fractional_parts(a);
  const double numerator = std::abs(std::log(c)) -
                           (2.0 * std::log(horizon + 2.0 * n_a + delta) + log_gamma(delta)) +
                           std::log(8.0) + delta * std::log(0.25 - h * h);
  const double x = numerator / std::abs(std::log(0.5 - h)) - 2.0 * n_a;
  return static_cast<int>(floor_clean(std::max(0.0, x)));
}

bool lower_limit_valid(double c, int horizon, double c0) { return c * (horizon + 1.0) <= c0; }

double bayes_risk_bound(int t, double h) {
  if (t < 1) throw DomainError("bayes_risk_bound requires t >= 1");
  if (!(h > 0.0 && h < 0.5)) throw DomainError("half-width must lie in (0, 0.5)");
  return 1.0 / (4.0 * h * h * t);
}

int chebyshev_horizon(double alpha, double h) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  int t = static_cast<int>(std::floor(1.0 / (4.0 * h * h * alpha)));
  t = std::max(t, 1);
  // Relative guard: 1/(4 h^2 t) == alpha exactly must not pass on rounding.
  while (bayes_risk_bound(t, h) >= alpha * (1.0 - 1e-12)) ++t;
  return t;
}

}  // namespace seqci::bounds
