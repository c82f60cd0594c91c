#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqci/dp_policy.hpp"
#include "seqci/prior_posterior.hpp"
#include "seqci/triangular.hpp"

namespace seqci {

/// Any stopping scheme that decides from (t, S_t): sampling membership per
/// lattice cell, the mid-point it reports on stopping, and the posterior
/// probability C_t(s) that this mid-point misses.
struct SchemeOnLattice {
  std::string name;
  int horizon = 0;
  Triangular<std::uint8_t> sampling;  // 1 where s is in Omega_t; last row all 0
  Triangular<double> estimates;
  Triangular<double> comp_coverage;

  bool samples(int t, int s) const { return sampling(t, s) != 0; }
  /// 1 + the last t with a nonempty sampling region (0 for stop-at-0).
  int effective_horizon() const;
  /// Throws DomainError unless all arrays share the horizon and Omega_N is empty.
  void validate() const;
};

SchemeOnLattice scheme_from_policy(const StoppingPolicy& policy);

/// Scheme that stops everywhere at t = 0 with the given mid-point.
SchemeOnLattice stop_at_zero_scheme(double estimate, double comp_coverage);

// Exact backward recursions over the lattice.
double expected_samples_given_theta(const SchemeOnLattice& scheme, double theta);
double expected_samples_bayes(const SchemeOnLattice& scheme, const PriorSpec& prior);
double expected_samples_bayes(const SchemeOnLattice& scheme, const Triangular<double>& predictive);
double miss_prob_given_theta(const SchemeOnLattice& scheme, double theta, double h);
double miss_prob_bayes(const SchemeOnLattice& scheme, const PriorSpec& prior);
double miss_prob_bayes(const SchemeOnLattice& scheme, const Triangular<double>& predictive);

struct ThetaPerformance {
  double expected_n;
  double miss_prob;
};

/// Both per-theta recursions in one sweep.
ThetaPerformance evaluate_at_theta(const SchemeOnLattice& scheme, double theta, double h);

struct BayesPerformance {
  double expected_n;
  double miss_prob;
};
BayesPerformance evaluate_bayes(const SchemeOnLattice& scheme, const Triangular<double>& predictive);

struct PerformanceReport {
  std::vector<double> theta;
  std::vector<double> expected_n_given_theta;
  std::vector<double> miss_given_theta;
  double expected_n = 0.0;
  double miss_bayes = 0.0;
};

PerformanceReport performance_report(const SchemeOnLattice& scheme, const PriorSpec& prior,
                                     double h, std::span<const double> theta_grid);

/// n equispaced points on [0, 1] including both ends.
std::vector<double> theta_grid(int n = 1001);

struct WorstCase {
  double theta;
  double miss;
};

/// Argmax of the per-theta miss over the grid; first index wins ties.
WorstCase worst_case_miss(const SchemeOnLattice& scheme, double h, std::span<const double> grid);

struct SimulationSummary {
  double mean_t;
  double se_t;
  double miss_rate;
  double se_miss;
};

/// Monte Carlo walk of the lattice under Bernoulli(theta) data.
/// Replication r draws from std::mt19937_64 seeded with splitmix64(seed + r),
/// uniforms from the top 53 bits, success iff u < theta. Deterministic for a
/// fixed seed on every platform.
SimulationSummary simulate(const SchemeOnLattice& scheme, double theta, double h,
                           long long replications, std::uint64_t seed);

}  // namespace seqci
