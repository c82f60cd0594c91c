#include "seqci/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "seqci/errors.hpp"

namespace seqci {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

// lgamma(x) - Stirling(x), the remainder of Stirling's series.
double stirling_remainder(double x) {
  if (x >= 10.0) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli terms B_2k / (2k (2k-1) x^(2k-1)), k = 1..8
    double sum = -3617.0 / 122400.0;
    sum = sum * inv2 + 1.0 / 156.0;
    sum = sum * inv2 - 691.0 / 360360.0;
    sum = sum * inv2 + 1.0 / 1188.0;
    sum = sum * inv2 - 1.0 / 1680.0;
    sum = sum * inv2 + 1.0 / 1260.0;
    sum = sum * inv2 - 1.0 / 360.0;
    sum = sum * inv2 + 1.0 / 12.0;
    return sum * inv;
  }
  return log_gamma(x) - ((x - 0.5) * std::log(x) - x + kLogSqrt2Pi);
}

// log(1 + diff / den), falling back to a plain log ratio far from 1.
double log1p_ratio(double diff, double den) {
  const double d = diff / den;
  if (std::abs(d) < 0.5) return std::log1p(d);
  return std::log((den + diff) / den);
}

// log of x^p (1-x)^q / B(p, q), with y = 1 - x supplied by the caller.
double log_beta_prefactor(double x, double y, double p, double q) {
  if (x <= 0.0 || y <= 0.0) return -std::numeric_limits<double>::infinity();
  const double s = p + q;
  // p log(x s / p) + q log(y s / q). x s - p = x q - y p is formed directly
  // because x * s loses ~1e-12 absolute when s ~ 1e4.
  const double diff = x * q - y * p;
  const double lx = log1p_ratio(diff, p);
  const double ly = log1p_ratio(-diff, q);
  return p * lx + q * ly + 0.5 * std::log(p * q / s) - kLogSqrt2Pi - stirling_remainder(p) -
         stirling_remainder(q) + stirling_remainder(s);
}

// Continued fraction for I_x(p,q) (modified Lentz), valid and fast for
// x < (p+1)/(p+q+2).
double beta_continued_fraction(double x, double p, double q) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = p + q;
  const double qap = p + 1.0;
  const double qam = p - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double dm = m;
    const double m2 = 2.0 * dm;
    double aa = dm * (q - dm) * x / ((qam + m2) * (p + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(p + dm) * (qab + dm) * x / ((p + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NonConvergence("incomplete beta continued fraction did not converge (p=" +
                       std::to_string(p) + ", q=" + std::to_string(q) +
                       ", x=" + std::to_string(x) + ")");
}

// Lower tail on the convergent side: x < (p+1)/(p+q+2).
double lower_tail_direct(double x, double y, double p, double q) {
  const double lf = log_beta_prefactor(x, y, p, q);
  if (lf == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(lf) * beta_continued_fraction(x, p, q) / p;
}

void check_beta_args(double x, const BetaParams& params) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("incomplete beta: x=" + std::to_string(x) + " outside [0,1]");
  if (!(params.p > 0.0 && params.q > 0.0))
    throw DomainError("incomplete beta: shapes must be positive");
}

}  // namespace

BetaParams::BetaParams(double p_, double q_) : p(p_), q(q_) {
  if (!(p > 0.0 && q > 0.0) || !std::isfinite(p) || !std::isfinite(q))
    throw DomainError("Beta shapes must be positive and finite (p=" + std::to_string(p) +
                      ", q=" + std::to_string(q) + ")");
}

Bracket::Bracket(double lo_, double hi_, double tol_) : lo(lo_), hi(hi_), tol(tol_) {
  if (!(lo < hi)) throw DomainError("bracket requires lo < hi");
  if (!(tol > 0.0)) throw DomainError("bracket tolerance must be positive");
}

double reg_inc_beta(double x, const BetaParams& params) {
  check_beta_args(x, params);
  const double p = params.p;
  const double q = params.q;
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  // Closed forms for a unit shape; these keep uniform-prior arithmetic exact.
  if (q == 1.0) return std::pow(x, p);
  if (p == 1.0) return -std::expm1(q * std::log1p(-x));
  const double y = 1.0 - x;
  if (x < (p + 1.0) / (p + q + 2.0)) return std::min(1.0, lower_tail_direct(x, y, p, q));
  return std::max(0.0, 1.0 - lower_tail_direct(y, x, q, p));
}

double reg_inc_beta_upper(double x, const BetaParams& params) {
  check_beta_args(x, params);
  const double p = params.p;
  const double q = params.q;
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  if (q == 1.0) return -std::expm1(p * std::log(x));
  if (p == 1.0) return std::exp(q * std::log1p(-x));
  const double y = 1.0 - x;
  if (x < (p + 1.0) / (p + q + 2.0)) return std::max(0.0, 1.0 - lower_tail_direct(x, y, p, q));
  return std::min(1.0, lower_tail_direct(y, x, q, p));
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: x must be positive");
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_beta(double p, double q) {
  if (!(p > 0.0 && q > 0.0)) throw DomainError("log_beta: shapes must be positive");
  return log_gamma(p) + log_gamma(q) - log_gamma(p + q);
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail < 0.5))
    throw DomainError("normal_upper_quantile: tail must lie in (0, 0.5)");

  // Wichura, AS 241 (PPND16), evaluated at the lower tail and negated.
  const double p = tail;
  const double q = p - 0.5;
  double lower;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    lower = q *
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
  } else {
    double r = std::sqrt(-std::log(p));
    if (r <= 5.0) {
      r -= 1.6;
      lower = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
      r -= 5.0;
      lower = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    lower = -lower;  // q < 0 on this branch since tail < 0.5
  }
  return -lower;
}

double find_root(const std::function<double(double)>& f, const Bracket& bracket) {
  constexpr int kMaxIter = 200;
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::isnan(fa) || std::isnan(fb) || std::signbit(fa) == std::signbit(fb))
    throw NoSignChange("find_root: no sign change on [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]");

  bool force_bisect = false;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double width = b - a;
    if (width <= bracket.tol) return 0.5 * (a + b);
    const double mid = 0.5 * (a + b);
    double x = mid;
    if (!force_bisect && std::isfinite(fa) && std::isfinite(fb)) {
      const double secant = b - fb * (b - a) / (fb - fa);
      if (secant > a && secant < b) x = secant;
    }
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (std::isnan(fx)) throw NonConvergence("find_root: function returned NaN");
    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    // Regula falsi can pin one endpoint; insist on halving every other step.
    force_bisect = !force_bisect && (b - a) > 0.5 * width;
  }
  throw NonConvergence("find_root: iteration budget exhausted");
}

Maximum maximize_unimodal(const std::function<double(double)>& f, const Bracket& bracket) {
  constexpr int kNodes = 1024;
  const double lo = bracket.lo;
  const double hi = bracket.hi;
  const double step = (hi - lo) / (kNodes - 1);
  auto node = [&](int i) { return i == kNodes - 1 ? hi : lo + step * i; };

  int best = 0;
  double best_value = f(lo);
  for (int i = 1; i < kNodes; ++i) {
    const double v = f(node(i));
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }

  double a = node(std::max(best - 1, 0));
  double b = node(std::min(best + 1, kNodes - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int iter = 0; iter < 200 && (b - a) > bracket.tol; ++iter) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double refined = 0.5 * (a + b);
  const double refined_value = f(refined);
  if (refined_value > best_value) return {refined, refined_value};
  return {node(best), best_value};
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace seqci
