#pragma once

#include "seqci/prior_posterior.hpp"
#include "seqci/triangular.hpp"

namespace seqci {

/// Half-width h of the reported interval [mid - h, mid + h], 0 < h < 1/2.
class HalfWidth {
 public:
  explicit HalfWidth(double h);
  double value() const noexcept { return h_; }
  operator double() const noexcept { return h_; }

 private:
  double h_;
};

struct MidpointCell {
  double estimate;       // interval mid-point
  double comp_coverage;  // posterior probability the interval misses theta
};

/// Posterior probability that theta falls outside [mid-h, mid+h] cropped to [0,1].
double coverage_given_midpoint(const PosteriorState& state, double mid, HalfWidth h);

/// Stationarity residual of the coverage in the mid-point, in log form:
///   log k(mid - h) - log k(mid + h),   k(theta) = theta^s (1-theta)^(t-s) pi(theta).
/// For a Beta(p,q) prior this is
///   (p+s-1) log((mid-h)/(mid+h)) - (q+t-s-1) log((1-h-mid)/(1+h-mid)).
/// Same zeros and signs as the power-form difference; positive where the
/// coverage decreases in mid. Requires h <= mid <= 1-h.
double root_equation_residual(const PosteriorState& state, double mid, HalfWidth h);

/// Mid-point that minimizes the complementary coverage. Candidates are the
/// interior roots of the residual plus both ends h and 1-h; ties (relative
/// 1e-13) go to the smaller mid-point. A flat posterior returns 1/2.
MidpointCell optimal_midpoint(const PosteriorState& state, HalfWidth h);

struct CoverageGrid {
  int horizon = 0;
  Triangular<double> estimates;
  Triangular<double> comp_coverage;

  CoverageGrid truncated(int n) const {
    return {n, estimates.truncated(n), comp_coverage.truncated(n)};
  }
};

/// optimal_midpoint at every (t, s) with 0 <= s <= t <= horizon.
/// Symmetric priors compute s <= t/2 and mirror the rest.
CoverageGrid coverage_grid(const PriorSpec& prior, HalfWidth h, int horizon);

}  // namespace seqci
