#include "seqci/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "seqci/errors.hpp"
#include "seqci/special_functions.hpp"

namespace seqci {

namespace {

struct FreyRow {
  double h;
  double confidence;
  double k;
  double gamma;
};

// Published (k, gamma) choices for Frey's rule per half-width and
// confidence level.
constexpr std::array<FreyRow, 9> kFreyTable{{
    {0.10, 0.90, 4.0, 0.0754},
    {0.10, 0.95, 4.0, 0.0356},
    {0.10, 0.99, 6.0, 0.0068},
    {0.05, 0.90, 4.0, 0.0859},
    {0.05, 0.95, 6.0, 0.0433},
    {0.05, 0.99, 8.0, 0.0083},
    {0.01, 0.90, 8.0, 0.0972},
    {0.01, 0.95, 10.0, 0.0487},
    {0.01, 0.99, 14.0, 0.0097},
}};

struct PolicyEval {
  StoppingPolicy policy;
  double miss;
  double expected_n;
};

PolicyEval evaluate_policy(const LatticeModel& model, double c) {
  StoppingPolicy policy = backward_solve(model, CostPerSample(c));
  const auto perf = evaluate_bayes(scheme_from_policy(policy), model.predictive);
  return {std::move(policy), perf.miss_prob, perf.expected_n};
}

}  // namespace

FreyConfig::FreyConfig(double k_, double gamma_, double h_) : k(k_), gamma(gamma_), h(h_) {
  if (!(k > 0.0)) throw DomainError("Frey shrinkage k must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("Frey gamma must lie in (0, 1)");
  HalfWidth checked(h);
}

std::optional<FreyConfig> frey_table(double h, double confidence) {
  for (const auto& row : kFreyTable)
    if (std::abs(row.h - h) < 1e-12 && std::abs(row.confidence - confidence) < 1e-12)
      return FreyConfig(row.k, row.gamma, row.h);
  return std::nullopt;
}

int frey_horizon(const FreyConfig& config) {
  const double z = normal_upper_quantile(config.gamma / 2.0);
  return static_cast<int>(std::ceil(z * z / (4.0 * config.h * config.h)));
}

SchemeOnLattice frey_scheme(const FreyConfig& config, const PriorSpec& prior) {
  const double z = normal_upper_quantile(config.gamma / 2.0);
  const int n = frey_horizon(config);
  const double threshold = (config.h / z) * (config.h / z);
  const HalfWidth h(config.h);

  SchemeOnLattice scheme;
  scheme.name = "frey";
  scheme.horizon = n;
  scheme.sampling = Triangular<std::uint8_t>(n, 0);
  scheme.estimates = Triangular<double>(n);
  scheme.comp_coverage = Triangular<double>(n);
  for (int t = 0; t <= n; ++t) {
    for (int s = 0; s <= t; ++s) {
      bool stop;
      double estimate;
      if (t == 0) {
        stop = n == 0;
        estimate = 0.5;
      } else {
        const double shrunk = (s + config.k) / (t + 2.0 * config.k);
        stop = t == n || shrunk * (1.0 - shrunk) / t <= threshold;
        estimate = static_cast<double>(s) / t;
      }
      scheme.sampling(t, s) = stop ? 0 : 1;
      scheme.estimates(t, s) = estimate;
      scheme.comp_coverage(t, s) = coverage_given_midpoint(PosteriorState(t, s, prior), estimate, h);
    }
  }
  return scheme;
}

SchemeOnLattice fss_scheme(const LatticeModel& model, int n) {
  if (n < 0 || n > model.horizon)
    throw DomainError("fixed sample size " + std::to_string(n) + " outside model horizon");
  SchemeOnLattice scheme;
  scheme.name = "fss";
  scheme.horizon = n;
  scheme.sampling = Triangular<std::uint8_t>(n, 1);
  for (int s = 0; s <= n; ++s) scheme.sampling(n, s) = 0;
  scheme.estimates = model.coverage.estimates.truncated(n);
  scheme.comp_coverage = model.coverage.comp_coverage.truncated(n);
  return scheme;
}

int conditional_horizon(const PriorSpec& prior, double h, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("conditional threshold must lie in (0, 1)");
  const BetaParams shapes = prior.beta_params();
  const double x = std::abs(std::log(beta / 2.0)) / (2.0 * h * h) - (shapes.p + shapes.q) - 1.0;
  const double v = std::max(x, 0.0);
  const double r = std::round(v);
  return static_cast<int>(std::abs(v - r) <= 1e-9 * std::max(1.0, v) ? r : std::ceil(v));
}

SchemeOnLattice conditional_scheme(const LatticeModel& model, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("conditional threshold must lie in (0, 1)");
  const int n = model.prior.is_beta() ? conditional_horizon(model.prior, model.h, beta) : model.horizon;
  if (n > model.horizon)
    throw DomainError("conditional scheme needs horizon " + std::to_string(n) +
                      " but the model stops at " + std::to_string(model.horizon));
  SchemeOnLattice scheme;
  scheme.name = "conditional";
  scheme.horizon = n;
  scheme.sampling = Triangular<std::uint8_t>(n, 0);
  for (int t = 0; t < n; ++t)
    for (int s = 0; s <= t; ++s)
      scheme.sampling(t, s) = model.coverage.comp_coverage(t, s) > beta ? 1 : 0;
  scheme.estimates = model.coverage.estimates.truncated(n);
  scheme.comp_coverage = model.coverage.comp_coverage.truncated(n);
  return scheme;
}

CalibrationResult calibrate_c(const LatticeModel& model, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const double c0 = model.coverage.comp_coverage(0, 0);

  if (alpha >= c0) {
    PolicyEval stop = evaluate_policy(model, 1.0);
    CalibrationResult result{.c_star = 1.0,
                             .randomization_p = 1.0,
                             .policy_lo = stop.policy,
                             .policy_hi = stop.policy,
                             .miss_lo = stop.miss,
                             .miss_hi = stop.miss,
                             .expected_n_lo = 0.0,
                             .expected_n_hi = 0.0,
                             .achieved_miss = stop.miss,
                             .expected_n = 0.0,
                             .trivial = true,
                             .trace = {{1.0, stop.miss}}};
    return result;
  }

  std::vector<CalibrationStep> trace;
  auto eval = [&](double c) {
    PolicyEval e = evaluate_policy(model, c);
    trace.push_back({c, e.miss});
    return e;
  };

  double lo = 1e-12;
  PolicyEval e_lo = eval(lo);
  if (e_lo.miss > alpha)
    throw BracketFailure("horizon " + std::to_string(model.horizon) + " too short: c = 1e-12 misses " +
                         std::to_string(e_lo.miss) + " > alpha");
  double hi = 1.0;
  PolicyEval e_hi = eval(hi);

  for (int iter = 0; iter < 60; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    PolicyEval e = eval(mid);
    if (e.miss <= alpha) {
      lo = mid;
      e_lo = std::move(e);
    } else {
      hi = mid;
      e_hi = std::move(e);
    }
  }

  double p = 1.0;
  double achieved = e_lo.miss;
  double expected = e_lo.expected_n;
  const double c_star = std::sqrt(lo * hi);
  if (e_hi.miss - e_lo.miss > 1e-6) {
    p = (e_hi.miss - alpha) / (e_hi.miss - e_lo.miss);
    achieved = p * e_lo.miss + (1.0 - p) * e_hi.miss;
    expected = p * e_lo.expected_n + (1.0 - p) * e_hi.expected_n;
  }
  return CalibrationResult{.c_star = c_star,
                           .randomization_p = p,
                           .policy_lo = std::move(e_lo.policy),
                           .policy_hi = std::move(e_hi.policy),
                           .miss_lo = e_lo.miss,
                           .miss_hi = e_hi.miss,
                           .expected_n_lo = e_lo.expected_n,
                           .expected_n_hi = e_hi.expected_n,
                           .achieved_miss = achieved,
                           .expected_n = expected,
                           .trivial = false,
                           .trace = std::move(trace)};
}

double scheme_miss(const SchemeOnLattice& scheme, const Triangular<double>& predictive, double h,
                   CalibrationMode mode, std::span<const double> grid) {
  if (mode == CalibrationMode::Bayes) return evaluate_bayes(scheme, predictive).miss_prob;
  return worst_case_miss(scheme, h, grid).miss;
}

ScalarCalibration calibrate_scalar(const std::function<SchemeOnLattice(double)>& family,
                                   const Triangular<double>& predictive, double h, double target,
                                   CalibrationMode mode, std::span<const double> grid,
                                   const ScalarSearch& search) {
  if (!(search.lo < search.hi)) throw DomainError("calibrate_scalar: empty search interval");
  if (search.log_scale && !(search.lo > 0.0))
    throw DomainError("calibrate_scalar: log-scale search needs a positive lower end");
  int evaluations = 0;
  auto miss_at = [&](double x) {
    ++evaluations;
    return scheme_miss(family(x), predictive, h, mode, grid);
  };

  double a = search.integer ? std::ceil(search.lo) : search.lo;
  double b = search.integer ? std::floor(search.hi) : search.hi;
  const double ma = miss_at(a);
  const double mb = miss_at(b);
  const bool fa = ma <= target;
  const bool fb = mb <= target;
  if (fa == fb)
    throw BracketFailure("calibrate_scalar: misses " + std::to_string(ma) + " and " +
                         std::to_string(mb) + " do not straddle " + std::to_string(target));

  double feasible = fa ? a : b;
  double feasible_miss = fa ? ma : mb;
  double infeasible = fa ? b : a;
  double infeasible_miss = fa ? mb : ma;

  for (int iter = 0; iter < search.max_iterations; ++iter) {
    const double gap = std::abs(feasible - infeasible);
    if (search.integer) {
      if (gap <= 1.0) break;
    } else {
      if (search.tolerance > 0.0 && target - feasible_miss <= search.tolerance) break;
      if (gap <= 1e-12 * std::max(std::abs(feasible), std::abs(infeasible))) break;
    }
    double mid;
    if (search.integer)
      mid = std::floor(0.5 * (feasible + infeasible));
    else if (search.log_scale)
      mid = std::sqrt(feasible * infeasible);
    else
      mid = 0.5 * (feasible + infeasible);
    const double m = miss_at(mid);
    if (m <= target) {
      feasible = mid;
      feasible_miss = m;
    } else {
      infeasible = mid;
      infeasible_miss = m;
    }
  }
  return {feasible, feasible_miss, infeasible, infeasible_miss, evaluations};
}

}  // namespace seqci
