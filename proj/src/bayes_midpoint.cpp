#include "seqci/bayes_midpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "seqci/errors.hpp"

namespace seqci {

namespace {

constexpr int kScanNodes = 512;
constexpr double kTieRelTol = 1e-13;

// e * log(x) with 0 * log(0) = 0 and the limiting sign otherwise.
double scaled_log(double e, double x) {
  if (e == 0.0) return 0.0;
  return e * std::log(std::max(x, 0.0));
}

double log_kernel(const PosteriorState& state, double theta) {
  return scaled_log(state.s(), theta) + scaled_log(state.t() - state.s(), 1.0 - theta) +
         state.prior().log_density(theta);
}

bool ties(double a, double b) {
  return std::abs(a - b) <= kTieRelTol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

HalfWidth::HalfWidth(double h) : h_(h) {
  if (!(h > 0.0 && h < 0.5))
    throw DomainError("half-width must lie in (0, 0.5), got " + std::to_string(h));
}

double coverage_given_midpoint(const PosteriorState& state, double mid, HalfWidth h) {
  if (!(mid >= 0.0 && mid <= 1.0)) throw DomainError("mid-point outside [0,1]");
  if (state.prior().is_beta()) {
    // Upper tail as I_{(1-mid)-h}(q, p): avoids rounding in 1 - (mid + h).
    const BetaParams post = posterior_params(state);
    const double lower = reg_inc_beta(std::max(0.0, mid - h), post);
    const double upper = reg_inc_beta(std::max(0.0, (1.0 - mid) - h), BetaParams(post.q, post.p));
    return std::min(1.0, lower + upper);
  }
  return posterior_tail_mass(state, std::max(0.0, mid - h), std::min(1.0, mid + h));
}

double root_equation_residual(const PosteriorState& state, double mid, HalfWidth h) {
  const double upper = 1.0 - h;
  if (!(mid >= h && mid <= upper)) throw DomainError("residual requires h <= mid <= 1-h");
  double r;
  if (state.prior().is_beta()) {
    const BetaParams post = posterior_params(state);
    const double a = post.p - 1.0;
    const double b = post.q - 1.0;
    r = scaled_log(a, (mid - h) / (mid + h)) - scaled_log(b, (upper - mid) / (1.0 + h - mid));
  } else {
    r = log_kernel(state, mid - h) - log_kernel(state, mid + h);
  }
  return std::isnan(r) ? 0.0 : r;
}

MidpointCell optimal_midpoint(const PosteriorState& state, HalfWidth h) {
  const double lo = h;
  const double hi = 1.0 - h;
  auto residual = [&](double m) { return root_equation_residual(state, m, h); };

  std::vector<double> candidates{lo};
  bool flat = false;

  bool monotone = false;
  if (state.prior().is_beta()) {
    const BetaParams post = posterior_params(state);
    const double a = post.p - 1.0;
    const double b = post.q - 1.0;
    flat = a == 0.0 && b == 0.0;
    // Both exponents positive: the residual increases strictly from -inf to +inf.
    monotone = a > 0.0 && b > 0.0;
  }

  if (monotone) {
    candidates.push_back(find_root(residual, Bracket(lo, hi)));
  } else if (!flat) {
    const double step = (hi - lo) / (kScanNodes - 1);
    double x_prev = lo;
    double r_prev = residual(lo);
    bool all_zero = r_prev == 0.0;
    for (int i = 1; i < kScanNodes; ++i) {
      const double x = i == kScanNodes - 1 ? hi : lo + step * i;
      const double r = residual(x);
      all_zero = all_zero && r == 0.0;
      if (r == 0.0) {
        candidates.push_back(x);
      } else if (r_prev != 0.0 && std::signbit(r) != std::signbit(r_prev)) {
        candidates.push_back(find_root(residual, Bracket(x_prev, x)));
      }
      x_prev = x;
      r_prev = r;
    }
    flat = all_zero;
  }

  if (flat) return {0.5, coverage_given_midpoint(state, 0.5, h)};

  candidates.push_back(hi);
  std::sort(candidates.begin(), candidates.end());

  MidpointCell best{candidates.front(), coverage_given_midpoint(state, candidates.front(), h)};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double c = coverage_given_midpoint(state, candidates[i], h);
    if (c < best.comp_coverage && !ties(c, best.comp_coverage)) best = {candidates[i], c};
  }
  return best;
}

CoverageGrid coverage_grid(const PriorSpec& prior, HalfWidth h, int horizon) {
  if (horizon < 0) throw DomainError("coverage_grid: negative horizon");
  CoverageGrid grid{horizon, Triangular<double>(horizon), Triangular<double>(horizon)};
  const bool mirror = prior.is_symmetric();
  for (int t = 0; t <= horizon; ++t) {
    const int last = mirror ? t / 2 : t;
    for (int s = 0; s <= last; ++s) {
      const MidpointCell cell = optimal_midpoint(PosteriorState(t, s, prior), h);
      grid.estimates(t, s) = cell.estimate;
      grid.comp_coverage(t, s) = cell.comp_coverage;
    }
    if (mirror) {
      for (int s = last + 1; s <= t; ++s) {
        grid.estimates(t, s) = 1.0 - grid.estimates(t, t - s);
        grid.comp_coverage(t, s) = grid.comp_coverage(t, t - s);
      }
    }
  }
  return grid;
}

}  // namespace seqci
