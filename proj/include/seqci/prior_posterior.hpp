#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "seqci/special_functions.hpp"
#include "seqci/triangular.hpp"

namespace seqci {

/// Prior density on the success probability: a Beta law or a piecewise-linear
/// tabulated density on [0, 1]. Immutable; cheap to copy.
class PriorSpec {
 public:
  struct Node {
    double theta;
    double density;
    friend bool operator==(const Node&, const Node&) = default;
  };

  static PriorSpec beta(double p, double q);
  static PriorSpec symmetric_beta(double a) { return beta(a, a); }

  /// Nodes must start at 0, end at 1, be strictly increasing in theta with
  /// nonnegative densities integrating to 1 (1e-8) under the module quadrature.
  static PriorSpec tabulated(std::vector<Node> nodes);

  /// Same as tabulated() but rescales the densities to unit mass first.
  static PriorSpec tabulated_normalized(std::vector<Node> nodes);

  bool is_beta() const noexcept { return !table_; }
  /// Beta shapes; throws UnsupportedPrior for tabulated priors.
  BetaParams beta_params() const;
  const std::vector<Node>& nodes() const;

  /// True for Beta(a, a) and for tables that mirror around 1/2.
  bool is_symmetric() const noexcept { return symmetric_; }

  double density(double theta) const;
  double log_density(double theta) const;

  friend bool operator==(const PriorSpec& a, const PriorSpec& b);

 private:
  struct Table;

  PriorSpec() = default;

  double p_ = 1.0;
  double q_ = 1.0;
  bool symmetric_ = true;
  std::shared_ptr<const Table> table_;

  friend class PosteriorState;
  friend double log_posterior_integral(const PriorSpec&, int, int, double, double);
};

/// (t, S_t) on the observation lattice, together with the prior.
class PosteriorState {
 public:
  PosteriorState(int t, int s, PriorSpec prior);

  int t() const noexcept { return t_; }
  int s() const noexcept { return s_; }
  const PriorSpec& prior() const noexcept { return prior_; }

 private:
  int t_;
  int s_;
  PriorSpec prior_;
};

/// log of the integral over [lo, hi] of theta^s (1-theta)^(t-s) pi(theta),
/// by composite Gauss-Legendre (32 panels of 64 nodes) in log space.
double log_posterior_integral(const PriorSpec& prior, int t, int s, double lo, double hi);

/// Beta prior only: (p + s, q + t - s).
BetaParams posterior_params(const PosteriorState& state);

double posterior_cdf(const PosteriorState& state, double x);

/// P(theta < lo) + P(theta > hi) under the posterior, with lo <= hi.
double posterior_tail_mass(const PosteriorState& state, double lo, double hi);

/// Posterior mean E[theta | S_t], equal to P(X_{t+1} = 1 | S_t).
double predictive_success(const PosteriorState& state);
inline double predictive_failure(const PosteriorState& state) {
  return 1.0 - predictive_success(state);
}

/// g_{t+1}(s) for all 0 <= s <= t <= horizon.
Triangular<double> predictive_grid(const PriorSpec& prior, int horizon);

}  // namespace seqci
