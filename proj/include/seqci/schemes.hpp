#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "seqci/dp_policy.hpp"
#include "seqci/performance.hpp"

namespace seqci {

/// Frey's shrinkage Wald rule: stop at the first t >= 1 with
///   th (1 - th) / t <= (h / z_{gamma/2})^2,   th = (S_t + k) / (t + 2k),
/// reporting S_t / t as the mid-point.
struct FreyConfig {
  double k;
  double gamma;
  double h;

  FreyConfig(double k, double gamma, double h);
};

/// Published (k, gamma) for half-widths 0.10, 0.05, 0.01 at confidence
/// levels 0.90, 0.95, 0.99. Returns nullopt for unlisted pairs.
std::optional<FreyConfig> frey_table(double h, double confidence);

/// ceil(z_{gamma/2}^2 / (4 h^2)): the rule has always stopped by then.
int frey_horizon(const FreyConfig& config);

/// C_t(s) for Frey's mid-point is computed under `prior`.
SchemeOnLattice frey_scheme(const FreyConfig& config, const PriorSpec& prior);

/// Fixed sample size n with the Bayes mid-point; needs model.horizon >= n.
SchemeOnLattice fss_scheme(const LatticeModel& model, int n);

/// ceil(max{|ln(beta/2)|/(2h^2) - (p+q) - 1, 0}); Beta priors only.
int conditional_horizon(const PriorSpec& prior, double h, double beta);

/// Stop as soon as C_t(S_t) <= beta. The horizon is conditional_horizon()
/// for Beta priors and the model horizon otherwise.
SchemeOnLattice conditional_scheme(const LatticeModel& model, double beta);

struct CalibrationStep {
  double c;
  double miss;
};

struct CalibrationResult {
  double c_star = 0.0;
  /// Probability of running policy_lo (the c*- policy) instead of policy_hi.
  double randomization_p = 1.0;
  StoppingPolicy policy_lo;
  StoppingPolicy policy_hi;
  double miss_lo = 0.0;
  double miss_hi = 0.0;
  double expected_n_lo = 0.0;
  double expected_n_hi = 0.0;
  double achieved_miss = 0.0;
  double expected_n = 0.0;  // randomization mixture
  bool trivial = false;     // alpha >= C_0: stop without sampling
  std::vector<CalibrationStep> trace;
};

/// Lagrange multiplier c* for which the optimal policy's Bayes miss meets
/// alpha, randomizing between the bracketing policies when the miss jumps
/// over alpha. Bisection on log c over [1e-12, 1], 60 steps.
/// Throws BracketFailure if even the c = 1e-12 policy misses more than alpha.
CalibrationResult calibrate_c(const LatticeModel& model, double alpha);

enum class CalibrationMode { Bayes, WorstCase };

struct ScalarSearch {
  double lo;
  double hi;
  bool integer = false;
  bool log_scale = false;
  int max_iterations = 60;
  /// Stop once the feasible side is within this distance of the target
  /// (0: run until the bracket collapses).
  double tolerance = 1e-3;
};

struct ScalarCalibration {
  double parameter;
  double achieved_miss;
  double infeasible_parameter;
  double infeasible_miss;
  int evaluations;
};

/// Bisection on a one-parameter scheme family whose miss is monotone in the
/// parameter. Returns the feasible (miss <= target) end of the final bracket;
/// for integer families that is the feasible integer adjacent to the
/// infeasible one. Throws BracketFailure if the ends do not straddle target.
ScalarCalibration calibrate_scalar(const std::function<SchemeOnLattice(double)>& family,
                                   const Triangular<double>& predictive, double h, double target,
                                   CalibrationMode mode, std::span<const double> theta_grid,
                                   const ScalarSearch& search);

/// Miss of a scheme under the given mode.
double scheme_miss(const SchemeOnLattice& scheme, const Triangular<double>& predictive, double h,
                   CalibrationMode mode, std::span<const double> theta_grid);

}  // namespace seqci
