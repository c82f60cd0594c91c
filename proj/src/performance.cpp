#include "seqci/performance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "seqci/errors.hpp"

namespace seqci {

namespace {

// Hull of the success counts reachable at each t while still sampling.
struct Reach {
  std::vector<SamplingInterval> rows;  // rows[t] empty once the walk has stopped
  int last = 0;                        // last t with a reachable cell
};

Reach reachable(const SchemeOnLattice& scheme) {
  Reach r;
  r.rows.assign(static_cast<std::size_t>(scheme.horizon) + 1, SamplingInterval{});
  r.rows[0] = {0, 0};
  for (int t = 0; t < scheme.horizon; ++t) {
    const auto& cur = r.rows[static_cast<std::size_t>(t)];
    if (cur.empty()) break;
    r.last = t;
    int lo = -1;
    int hi = -2;
    for (int s = cur.lo; s <= cur.hi; ++s) {
      if (!scheme.samples(t, s)) continue;
      if (lo < 0) lo = s;
      hi = s;
    }
    if (lo < 0) break;
    r.rows[static_cast<std::size_t>(t) + 1] = {lo, hi + 1};
    r.last = t + 1;
  }
  return r;
}

// Slack absorbs rounding in stored mid-points such as 1 - h.
constexpr double kMissSlack = 1e-12;

bool misses(double estimate, double theta, double h) {
  return std::abs(estimate - theta) > h + kMissSlack;
}

ThetaPerformance evaluate_theta(const SchemeOnLattice& scheme, const Reach& reach, double theta,
                                double h) {
  const std::size_t width = static_cast<std::size_t>(scheme.horizon) + 2;
  std::vector<double> u_next(width, 0.0), w_next(width, 0.0);
  std::vector<double> u_cur(width, 0.0), w_cur(width, 0.0);

  {
    const int t = reach.last;
    const auto& row = reach.rows[static_cast<std::size_t>(t)];
    for (int s = row.lo; s <= row.hi; ++s) {
      // Every reachable cell on the last reachable row stops.
      u_next[static_cast<std::size_t>(s)] = 0.0;
      w_next[static_cast<std::size_t>(s)] = misses(scheme.estimates(t, s), theta, h) ? 1.0 : 0.0;
    }
  }
  for (int t = reach.last - 1; t >= 0; --t) {
    const auto& row = reach.rows[static_cast<std::size_t>(t)];
    for (int s = row.lo; s <= row.hi; ++s) {
      const auto i = static_cast<std::size_t>(s);
      if (scheme.samples(t, s)) {
        u_cur[i] = 1.0 + theta * u_next[i + 1] + (1.0 - theta) * u_next[i];
        w_cur[i] = theta * w_next[i + 1] + (1.0 - theta) * w_next[i];
      } else {
        u_cur[i] = 0.0;
        w_cur[i] = misses(scheme.estimates(t, s), theta, h) ? 1.0 : 0.0;
      }
    }
    std::swap(u_cur, u_next);
    std::swap(w_cur, w_next);
  }
  return {u_next[0], w_next[0]};
}

BayesPerformance evaluate_bayes_impl(const SchemeOnLattice& scheme, const Reach& reach,
                                     const Triangular<double>& g) {
  if (reach.last > 0 && g.horizon() < reach.last - 1)
    throw DomainError("predictive grid shorter than the scheme");
  const std::size_t width = static_cast<std::size_t>(scheme.horizon) + 2;
  std::vector<double> u_next(width, 0.0), w_next(width, 0.0);
  std::vector<double> u_cur(width, 0.0), w_cur(width, 0.0);
  {
    const int t = reach.last;
    const auto& row = reach.rows[static_cast<std::size_t>(t)];
    for (int s = row.lo; s <= row.hi; ++s) w_next[static_cast<std::size_t>(s)] = scheme.comp_coverage(t, s);
  }
  for (int t = reach.last - 1; t >= 0; --t) {
    const auto& row = reach.rows[static_cast<std::size_t>(t)];
    for (int s = row.lo; s <= row.hi; ++s) {
      const auto i = static_cast<std::size_t>(s);
      if (scheme.samples(t, s)) {
        const double p = g(t, s);
        u_cur[i] = 1.0 + p * u_next[i + 1] + (1.0 - p) * u_next[i];
        w_cur[i] = p * w_next[i + 1] + (1.0 - p) * w_next[i];
      } else {
        u_cur[i] = 0.0;
        w_cur[i] = scheme.comp_coverage(t, s);
      }
    }
    std::swap(u_cur, u_next);
    std::swap(w_cur, w_next);
  }
  return {u_next[0], w_next[0]};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

int SchemeOnLattice::effective_horizon() const {
  for (int t = horizon - 1; t >= 0; --t)
    for (int s = 0; s <= t; ++s)
      if (samples(t, s)) return t + 1;
  return 0;
}

void SchemeOnLattice::validate() const {
  if (sampling.horizon() != horizon || estimates.horizon() != horizon ||
      comp_coverage.horizon() != horizon)
    throw DomainError("scheme arrays disagree on the horizon");
  for (int s = 0; s <= horizon; ++s)
    if (samples(horizon, s)) throw DomainError("scheme samples on its last row");
}

SchemeOnLattice scheme_from_policy(const StoppingPolicy& policy) {
  SchemeOnLattice scheme;
  scheme.name = "optimal";
  scheme.horizon = policy.horizon;
  scheme.sampling = Triangular<std::uint8_t>(policy.horizon, 0);
  for (int t = 0; t < policy.horizon; ++t) {
    for (const auto& piece : policy.region(t).pieces())
      for (int s = piece.lo; s <= piece.hi; ++s) scheme.sampling(t, s) = 1;
  }
  scheme.estimates = policy.estimates;
  scheme.comp_coverage = policy.comp_coverage;
  return scheme;
}

SchemeOnLattice stop_at_zero_scheme(double estimate, double comp_coverage) {
  SchemeOnLattice scheme;
  scheme.name = "stop-at-0";
  scheme.horizon = 0;
  scheme.sampling = Triangular<std::uint8_t>(0, 0);
  scheme.estimates = Triangular<double>(0, estimate);
  scheme.comp_coverage = Triangular<double>(0, comp_coverage);
  return scheme;
}

ThetaPerformance evaluate_at_theta(const SchemeOnLattice& scheme, double theta, double h) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta outside [0,1]");
  return evaluate_theta(scheme, reachable(scheme), theta, h);
}

double expected_samples_given_theta(const SchemeOnLattice& scheme, double theta) {
  return evaluate_at_theta(scheme, theta, 0.25).expected_n;
}

double miss_prob_given_theta(const SchemeOnLattice& scheme, double theta, double h) {
  return evaluate_at_theta(scheme, theta, h).miss_prob;
}

BayesPerformance evaluate_bayes(const SchemeOnLattice& scheme, const Triangular<double>& predictive) {
  return evaluate_bayes_impl(scheme, reachable(scheme), predictive);
}

double expected_samples_bayes(const SchemeOnLattice& scheme, const Triangular<double>& predictive) {
  return evaluate_bayes(scheme, predictive).expected_n;
}

double expected_samples_bayes(const SchemeOnLattice& scheme, const PriorSpec& prior) {
  return expected_samples_bayes(scheme,
                                predictive_grid(prior, std::max(0, scheme.effective_horizon())));
}

double miss_prob_bayes(const SchemeOnLattice& scheme, const Triangular<double>& predictive) {
  return evaluate_bayes(scheme, predictive).miss_prob;
}

double miss_prob_bayes(const SchemeOnLattice& scheme, const PriorSpec& prior) {
  return miss_prob_bayes(scheme, predictive_grid(prior, std::max(0, scheme.effective_horizon())));
}

std::vector<double> theta_grid(int n) {
  if (n < 1) throw DomainError("theta grid needs at least one point");
  if (n == 1) return {0.5};
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
  return grid;
}

PerformanceReport performance_report(const SchemeOnLattice& scheme, const PriorSpec& prior,
                                     double h, std::span<const double> grid) {
  const Reach reach = reachable(scheme);
  PerformanceReport report;
  report.theta.assign(grid.begin(), grid.end());
  report.expected_n_given_theta.reserve(grid.size());
  report.miss_given_theta.reserve(grid.size());
  for (double theta : grid) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta outside [0,1]");
    const auto perf = evaluate_theta(scheme, reach, theta, h);
    report.expected_n_given_theta.push_back(perf.expected_n);
    report.miss_given_theta.push_back(perf.miss_prob);
  }
  const auto bayes =
      evaluate_bayes_impl(scheme, reach, predictive_grid(prior, std::max(0, reach.last)));
  report.expected_n = bayes.expected_n;
  report.miss_bayes = bayes.miss_prob;
  return report;
}

WorstCase worst_case_miss(const SchemeOnLattice& scheme, double h, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("worst_case_miss: empty theta grid");
  const Reach reach = reachable(scheme);
  WorstCase worst{grid[0], -1.0};
  for (double theta : grid) {
    const double miss = evaluate_theta(scheme, reach, theta, h).miss_prob;
    if (miss > worst.miss) worst = {theta, miss};
  }
  return worst;
}

SimulationSummary simulate(const SchemeOnLattice& scheme, double theta, double h,
                           long long replications, std::uint64_t seed) {
  if (replications < 1) throw DomainError("simulate: need at least one replication");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta outside [0,1]");
  double mean = 0.0;
  double m2 = 0.0;
  long long missed = 0;
  for (long long r = 0; r < replications; ++r) {
    std::mt19937_64 engine(splitmix64(seed + static_cast<std::uint64_t>(r)));
    int t = 0;
    int s = 0;
    while (t < scheme.horizon && scheme.samples(t, s)) {
      const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
      if (u < theta) ++s;
      ++t;
    }
    if (misses(scheme.estimates(t, s), theta, h)) ++missed;
    const double delta = t - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (t - mean);
  }
  const double n = static_cast<double>(replications);
  const double var = replications > 1 ? m2 / (n - 1.0) : 0.0;
  const double rate = static_cast<double>(missed) / n;
  return {mean, std::sqrt(var / n), rate, std::sqrt(rate * (1.0 - rate) / n)};
}

}  // namespace seqci
