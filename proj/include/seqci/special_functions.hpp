#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace seqci {

/// Shape parameters of a Beta(p, q) law.
struct BetaParams {
  double p;
  double q;

  BetaParams(double p, double q);
};

/// Closed search interval with an absolute stopping tolerance.
struct Bracket {
  double lo;
  double hi;
  double tol = 1e-12;

  Bracket(double lo, double hi, double tol = 1e-12);
};

/// Regularized incomplete beta I_x(p, q), i.e. the Beta(p, q) cdf at x.
///
/// Continued fraction (modified Lentz) on the side of the mean where it
/// converges fast; the other side goes through I_x(p,q) = 1 - I_{1-x}(q,p).
/// The prefactor x^p (1-x)^q / B(p,q) is formed from Stirling differences so
/// that large shapes (t ~ 1e4) keep full relative accuracy.
double reg_inc_beta(double x, const BetaParams& params);

/// 1 - I_x(p, q) without cancellation, i.e. the Beta(p, q) upper tail.
double reg_inc_beta_upper(double x, const BetaParams& params);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

/// log B(p, q).
double log_beta(double p, double q);

/// z such that Q(z) = tail, Q the standard normal complementary cdf.
/// Valid for 0 < tail < 0.5 (so z > 0).
double normal_upper_quantile(double tail);

/// Standard normal complementary cdf Q(z).
double normal_upper_tail(double z);

/// Bisection with safeguarded secant steps. Returns the midpoint of a final
/// bracket of width <= bracket.tol (or an exact zero).
/// Throws NoSignChange if f(lo) f(hi) > 0 and NonConvergence after 200 steps.
double find_root(const std::function<double(double)>& f, const Bracket& bracket);

struct Maximum {
  double argmax;
  double value;
};

/// 1024-node grid scan followed by golden-section refinement around the best
/// node. Grid ties resolve to the first (smallest) node; the refined point is
/// only taken when strictly better than the grid maximum.
Maximum maximize_unimodal(const std::function<double(double)>& f, const Bracket& bracket);

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

/// log(exp(a) + exp(b)) tolerating -inf arguments.
double log_add(double a, double b);

}  // namespace seqci
