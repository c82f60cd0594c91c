// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seqci/bounds.hpp"
#include "seqci/errors.hpp"
#include "seqci/performance.hpp"
#include "seqci/schemes.hpp"
#include "seqci/special_functions.hpp"

using namespace seqci;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failed sub-checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && std::find(failures.begin(), failures.end(), what) == failures.end()) failures.push_back(what);
  }
};

int failed = 0;

void report(int id, const std::string& title, const std::function<void(Check&)>& body) {
  Check chk;
  const auto start = Clock::now();
  try {
    body(chk);
  } catch (const std::exception& e) {
    chk.failures.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = chk.failures.empty();
  if (!ok) ++failed;
  std::printf("%s criterion %d: %s [%s] (%.1f s)\n", ok ? "PASS" : "FAIL", id, title.c_str(),
              chk.detail.str().c_str(), seconds_since(start));
  for (const auto& f : chk.failures) std::printf("    failed: %s\n", f.c_str());
  std::fflush(stdout);
}

const PriorSpec kUniform = PriorSpec::symmetric_beta(1);

const LatticeModel& wide_model() {
  static const LatticeModel model = build_model(kUniform, HalfWidth(0.05), bounds::log_horizon(1e-6, 1.0, 0.05));
  return model;
}

const LatticeModel& chebyshev_model() {
  static const LatticeModel model = wide_model().truncated(bounds::chebyshev_horizon(0.05, 0.05));
  return model;
}

SchemeOnLattice optimal_scheme(const LatticeModel& model, double c) {
  return scheme_from_policy(backward_solve(model, CostPerSample(c)));
}

// c E[T] + Bayes miss of the scheme that samples exactly on `mask` (bit per
// cell with t < n), by forward propagation of Beta(p, q) predictive mass.
double exhaustive_cost(unsigned mask, int n, double p, double q, double c, const Triangular<double>& comp) {
  double mass[8] = {1.0};
  double cost = 0.0;
  int bit = 0;
  for (int t = 0; t <= n; ++t) {
    double next[8] = {0.0};
    for (int s = 0; s <= t; ++s, ++bit) {
      const double m = mass[s];
      const bool sample = t < n && ((mask >> bit) & 1u);
      if (!sample) {
        cost += m * (c * t + comp(t, s));
        continue;
      }
      const double g = (s + p) / (t + p + q);
      next[s + 1] += m * g;
      next[s] += m * (1 - g);
    }
    std::copy(next, next + 8, mass);
  }
  return cost;
}

void criterion1(Check& chk) {
  const auto start = Clock::now();
  const auto policy = backward_solve(kUniform, HalfWidth(0.05), CostPerSample(1e-4), 600);
  const double secs = seconds_since(start);
  chk.detail << "t_lo=" << policy.t_lo << " t_up=" << policy.t_up << " build " << secs << " s";
  chk.expect(std::abs(policy.t_lo - 59) <= 1, "t_lo within 59 +- 1");
  chk.expect(std::abs(policy.t_up - 561) <= 1, "t_up within 561 +- 1");
  chk.expect(secs < 10.0, "runtime under 10 s");
}

void criterion2(Check& chk) {
  const double c0 = coverage_grid(kUniform, HalfWidth(0.05), 0).comp_coverage(0, 0);
  const auto cal = calibrate_c(build_model(kUniform, HalfWidth(0.05), 10), 0.95);
  chk.detail << "C_0=" << c0 << " trivial=" << cal.trivial << " E[T]=" << cal.expected_n;
  chk.expect(c0 == 0.9, "C_0 == 0.9 exactly");
  chk.expect(cal.trivial && cal.expected_n == 0.0 && cal.policy_lo.t_up == 0, "alpha = 0.95 stops at t = 0");
}

void criterion3(Check& chk) {
  const auto& model = wide_model();
  int prev_lo = 1 << 30, prev_up = 1 << 30;
  double prev_n = 1e300;
  for (double c : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    const auto policy = backward_solve(model, CostPerSample(c));
    const double en = evaluate_bayes(scheme_from_policy(policy), model.predictive).expected_n;
    chk.detail << "c=" << c << ":" << policy.t_lo << "/" << en << "/" << policy.t_up << " ";
    chk.expect(policy.t_lo <= en && en <= policy.t_up, "t_lo <= E[T] <= t_up");
    chk.expect(policy.t_lo <= prev_lo && en <= prev_n && policy.t_up <= prev_up, "nonincreasing in c");
    chk.expect(policy.t_up < model.horizon, "horizon not binding");
    prev_lo = policy.t_lo;
    prev_n = en;
    prev_up = policy.t_up;
  }
}

void criterion4(Check& chk) {
  const auto& model = wide_model();
  const double h = 0.05;
  for (double alpha : {0.10, 0.05}) {
    const auto opt = calibrate_c(model, alpha);
    const auto fss = calibrate_scalar([&](double n) { return fss_scheme(model, static_cast<int>(n)); },
                                      model.predictive, h, alpha, CalibrationMode::Bayes, {},
                                      ScalarSearch{.lo = 0, .hi = double(model.horizon), .integer = true});
    auto conditional = [&](double b) { return conditional_scheme(model, b); };
    const auto cond = calibrate_scalar(conditional, model.predictive, h, alpha, CalibrationMode::Bayes, {},
                                       ScalarSearch{.lo = 1e-5, .hi = 0.999, .log_scale = true, .tolerance = 1e-5});
    const double cond_n = expected_samples_bayes(conditional(cond.parameter), model.predictive);
    chk.detail << "alpha=" << alpha << ": opt " << opt.expected_n << " fss " << fss.parameter << " cond " << cond_n
               << "; ";
    chk.expect(std::abs(opt.achieved_miss - alpha) <= 1e-3, "optimal meets alpha");
    chk.expect(opt.expected_n <= fss.parameter, "optimal <= FSS");
    chk.expect(opt.expected_n <= cond_n, "optimal <= conditional");
  }
  // Frey at its published operating points, against the optimal policy
  // calibrated to the same Bayes miss.
  for (double conf : {0.90, 0.95}) {
    const FreyConfig cfg = *frey_table(h, conf);
    const auto frey = frey_scheme(cfg, kUniform);
    const auto perf = evaluate_bayes(frey, model.predictive);
    const auto opt = calibrate_c(model, perf.miss_prob);
    chk.detail << "frey " << conf << ": miss " << perf.miss_prob << " E[T] " << perf.expected_n << " vs opt "
               << opt.expected_n << "; ";
    chk.expect(opt.expected_n <= perf.expected_n, "optimal <= Frey");
  }
}

void criterion5(Check& chk) {
  const auto& model = chebyshev_model();
  const double h = 0.05, alpha = 0.05;
  const auto grid = theta_grid(201);
  auto optimal = [&](double c) { return optimal_scheme(model, c); };
  const auto opt = calibrate_scalar(optimal, model.predictive, h, alpha, CalibrationMode::WorstCase, grid,
                                    ScalarSearch{.lo = 1e-12, .hi = 1.0, .log_scale = true, .tolerance = 1e-4});
  const auto fss = calibrate_scalar([&](double n) { return fss_scheme(model, static_cast<int>(n)); },
                                    model.predictive, h, alpha, CalibrationMode::WorstCase, grid,
                                    ScalarSearch{.lo = 0, .hi = double(model.horizon), .integer = true});
  auto conditional = [&](double b) { return conditional_scheme(model, b); };
  const auto cond = calibrate_scalar(conditional, model.predictive, h, alpha, CalibrationMode::WorstCase, grid,
                                     ScalarSearch{.lo = 1e-4, .hi = 0.999, .log_scale = true, .tolerance = 1e-5});
  const auto opt_scheme = optimal(opt.parameter);
  double ratio = 0.0;
  for (double th : grid) ratio = std::max(ratio, fss.parameter / expected_samples_given_theta(opt_scheme, th));
  const double cond_ratio = expected_samples_given_theta(conditional(cond.parameter), 0.5) /
                            expected_samples_given_theta(opt_scheme, 0.5);
  chk.detail << "c=" << opt.parameter << " miss " << opt.achieved_miss << "; fss n=" << fss.parameter
             << "; cond beta=" << cond.parameter << "; max fss/opt " << ratio << "; cond/opt at 0.5 "
             << cond_ratio;
  chk.expect(opt.achieved_miss <= alpha, "optimal worst-case miss <= alpha");
  chk.expect(ratio >= 5.0, "FSS / optimal >= 5");
  chk.expect(cond_ratio >= 1.15, "conditional / optimal at 0.5 >= 1.15");
}

void criterion6(Check& chk) {
  const long long reps = 100000;
  const auto fig = optimal_scheme(build_model(kUniform, HalfWidth(0.05), 600), 1e-4);
  const auto frey = frey_scheme(FreyConfig(6, 0.0433, 0.05), kUniform);
  for (const auto* scheme : {&fig, &frey}) {
    for (double th : {0.1, 0.3, 0.5}) {
      const auto exact = evaluate_at_theta(*scheme, th, 0.05);
      const auto sim = simulate(*scheme, th, 0.05, reps, 20240601);
      const double se_miss = std::sqrt(exact.miss_prob * (1 - exact.miss_prob) / reps);
      const double zn = sim.se_t > 0 ? (sim.mean_t - exact.expected_n) / sim.se_t : 0.0;
      const double zm = se_miss > 0 ? (sim.miss_rate - exact.miss_prob) / se_miss : 0.0;
      chk.detail << scheme->name << "@" << th << ": zN=" << zn << " zMiss=" << zm << "; ";
      chk.expect(std::abs(sim.mean_t - exact.expected_n) <= 3 * sim.se_t, "E[T] within 3 SE");
      chk.expect(std::abs(sim.miss_rate - exact.miss_prob) <= 3 * se_miss, "miss within 3 SE");
    }
  }
}

void criterion7(Check& chk) {
  struct Case {
    double p, q, h, c;
  };
  const Case cases[] = {{1, 1, 0.05, 1e-2}, {1, 1, 0.2, 3e-2}, {0.5, 0.5, 0.1, 5e-3},
                        {2, 5, 0.15, 1e-2}, {3, 3, 0.3, 1e-3}, {1, 1, 0.1, 0.08}};
  int searched = 0;
  double worst_gap = 1e300;
  for (const auto& cs : cases) {
    for (int n = 1; n <= 6; ++n) {
      const auto model = build_model(PriorSpec::beta(cs.p, cs.q), HalfWidth(cs.h), n);
      const auto policy = backward_solve(model, CostPerSample(cs.c));
      const double v0 = policy.grid.values(0, 0);
      const unsigned cells = static_cast<unsigned>(n * (n + 1) / 2);
      double best = 1e300;
      for (unsigned mask = 0; mask < (1u << cells); ++mask)
        best = std::min(best, exhaustive_cost(mask, n, cs.p, cs.q, cs.c, model.coverage.comp_coverage));
      ++searched;
      worst_gap = std::min(worst_gap, best - v0);
      chk.expect(best >= v0 - 1e-12, "no region sequence beats V_0");
      chk.expect(std::abs(best - v0) <= 1e-12, "exhaustive optimum attains V_0");
    }
  }
  chk.detail << searched << " instances, min(best - V_0) = " << worst_gap;
}

void criterion8(Check& chk) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Estimator range on random cells.
  int cells = 0;
  for (; cells < 10000; ++cells) {
    const double hv = 0.005 + 0.48 * unit(rng);
    const int t = static_cast<int>(rng() % 2500);
    const int s = static_cast<int>(rng() % static_cast<unsigned>(t + 1));
    const PriorSpec prior = PriorSpec::beta(0.1 + 8 * unit(rng), 0.1 + 8 * unit(rng));
    const double est = optimal_midpoint(PosteriorState(t, s, prior), HalfWidth(hv)).estimate;
    chk.expect(est >= hv && est <= 1 - hv, "estimate in [h, 1 - h]");
  }

  // Supermartingale on full grids, sandwich bounds.
  for (double a : {0.5, 1.0, 2.0}) {
    const PriorSpec prior = PriorSpec::symmetric_beta(a);
    const auto grid = a == 1.0 ? chebyshev_model().coverage : coverage_grid(prior, HalfWidth(0.05), 800);
    const auto pred = predictive_grid(prior, grid.comp_coverage.horizon() - 1);
    for (int t = 0; t < grid.comp_coverage.horizon(); ++t) {
      double lo = 1.0, hi = 0.0;
      for (int s = 0; s <= t; ++s) {
        const double next = pred(t, s) * grid.comp_coverage(t + 1, s + 1) + (1 - pred(t, s)) * grid.comp_coverage(t + 1, s);
        chk.expect(grid.comp_coverage(t, s) >= next - 1e-12, "coverage supermartingale");
        lo = std::min(lo, grid.comp_coverage(t, s));
        hi = std::max(hi, grid.comp_coverage(t, s));
      }
      if (t >= 1) chk.expect(bounds::incbeta_lower(t, a, 0.05) <= lo, "incomplete-beta lower bound");
      chk.expect(hi <= bounds::chernoff_upper(t, a, 0.05), "Chernoff upper bound");
    }
  }

  // Incomplete-beta reflection identity.
  for (int i = 0; i < 10000; ++i) {
    const double p = std::exp(-3 + 10 * unit(rng)), q = std::exp(-3 + 10 * unit(rng)), x = unit(rng);
    const double sum = reg_inc_beta(x, BetaParams(p, q)) + reg_inc_beta(1 - x, BetaParams(q, p));
    chk.expect(std::abs(sum - 1.0) <= 1e-12, "I_x(p,q) + I_{1-x}(q,p) = 1");
  }

  // Region symmetry, monotonicity in c, horizon insensitivity.
  const auto& model = chebyshev_model();
  const auto full = backward_solve(model, CostPerSample(1e-4));
  const auto cheaper = backward_solve(model, CostPerSample(5e-5));
  const auto short_h = backward_solve(model.truncated(full.t_up + 1), CostPerSample(1e-4));
  for (int t = 0; t <= model.horizon; ++t) {
    if (full.region(t).is_interval()) {
      const Thresholds th = thresholds(full.grid, t);
      if (th.kind == Thresholds::Kind::Interval) chk.expect(th.r_lo + th.r_hi == t, "r_lo + r_hi = t");
    }
    for (int s = 0; s <= t; ++s) {
      chk.expect(full.region(t).contains(s) == full.region(t).contains(t - s), "mirror-symmetric regions");
      chk.expect(cheaper.grid.values(t, s) <= full.grid.values(t, s), "values monotone in c");
    }
    if (t <= full.t_up) chk.expect(short_h.region(t) == full.region(t), "regions horizon-insensitive");
  }
  chk.detail << cells << " random cells, supermartingale/sandwich for a in {0.5, 1, 2}, t_up=" << full.t_up;
}

void criterion9(Check& chk) {
  const auto cal = calibrate_c(chebyshev_model(), 0.05);
  auto trace = cal.trace;
  std::sort(trace.begin(), trace.end(), [](const auto& x, const auto& y) { return x.c < y.c; });
  bool monotone = true;
  for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i].miss >= trace[i - 1].miss;
  chk.detail << "c*=" << cal.c_star << " p=" << cal.randomization_p << " miss=" << cal.achieved_miss
             << " E[T]=" << cal.expected_n << " trace " << trace.size();
  chk.expect(std::abs(cal.achieved_miss - 0.05) <= 1e-3, "miss within 1e-3 of 0.05");
  chk.expect(monotone, "miss monotone in c along the trace");
}

}  // namespace

int main() {
  report(1, "limits at a=1, h=0.05, c=1e-4", criterion1);
  report(2, "trivial value and stop-at-0 calibration", criterion2);
  report(3, "limits and E[T] across c", criterion3);
  report(4, "optimal E[T] dominates competitors at Bayes targets", criterion4);
  report(5, "worst-case sample-size ratios", criterion5);
  report(6, "exact recursions vs Monte Carlo", criterion6);
  report(7, "exhaustive optimality for N <= 6", criterion7);
  report(8, "invariant suites", criterion8);
  report(9, "calibration accuracy and monotone trace", criterion9);
  std::printf("%s: %d criterion(s) failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
