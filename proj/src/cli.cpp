#include "seqci/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqci/bounds.hpp"
#include "seqci/errors.hpp"
#include "seqci/performance.hpp"
#include "seqci/policy_io.hpp"
#include "seqci/schemes.hpp"

namespace seqci::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Bad command-line usage: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal, independent of the global locale.
std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw UsageError(std::string("bad number '") + item + "' in " + what);
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(std::string(what) + " is empty");
  return values;
}

/// "N" gives N equispaced points on [0, 1]; "x,y,..." an explicit list.
std::vector<double> parse_theta_grid(const std::string& spec) {
  if (spec.find_first_of(",.") == std::string::npos) {
    int n = 0;
    const auto res = std::from_chars(spec.data(), spec.data() + spec.size(), n);
    if (spec.empty() || res.ec != std::errc() || res.ptr != spec.data() + spec.size())
      throw UsageError("bad --theta-grid '" + spec + "'");
    if (n < 1) throw UsageError("empty theta grid");
    return theta_grid(n);
  }
  auto grid = parse_list(spec, "--theta-grid");
  for (double th : grid)
    if (!(th >= 0.0 && th <= 1.0)) throw UsageError("theta " + num(th) + " outside [0, 1]");
  return grid;
}

struct PriorFlags {
  std::optional<double> a, p, q;

  void add(CLI::App* cmd) {
    cmd->add_option("--prior-a", a, "symmetric Beta(a, a) prior (default a = 1)");
    cmd->add_option("--prior-p", p, "Beta(p, q) prior, first shape");
    cmd->add_option("--prior-q", q, "Beta(p, q) prior, second shape");
  }

  PriorSpec resolve() const {
    if (a && (p || q)) throw UsageError("give either --prior-a or --prior-p/--prior-q");
    if (p.has_value() != q.has_value()) throw UsageError("--prior-p and --prior-q go together");
    if (p) return PriorSpec::beta(*p, *q);
    return PriorSpec::symmetric_beta(a.value_or(1.0));
  }
};

/// Mean shape (p + q) / 2, playing the role of a in the Beta-prior bounds.
double mean_shape(const PriorSpec& prior) {
  const BetaParams b = prior.beta_params();
  return 0.5 * (b.p + b.q);
}

fs::path output_path(const std::string& flag, const std::string& default_name) {
  if (!flag.empty()) return flag;
  const char* dir = std::getenv("SEQCI_OUT_DIR");
  return dir && *dir ? fs::path(dir) / default_name : fs::path(default_name);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CalibrationMode parse_mode(const std::string& mode) {
  if (mode == "bayes") return CalibrationMode::Bayes;
  if (mode == "worst-case") return CalibrationMode::WorstCase;
  throw UsageError("--mode must be bayes or worst-case");
}

void check_format(const std::string& format) {
  if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");
}

struct RegionRow {
  int r_lo;
  int r_hi;
  std::string marker;
};

// A split region reports the stopping bounds around its hull.
RegionRow region_row(const StoppingPolicy& policy, int t) {
  const SamplingRegion& region = policy.region(t);
  if (!region.is_interval()) return {region.lo() - 1, region.hi() + 1, "split"};
  const Thresholds th = thresholds(policy.grid, t);
  switch (th.kind) {
    case Thresholds::Kind::AllSampling: return {th.r_lo, th.r_hi, "sample"};
    case Thresholds::Kind::AllStopping: return {th.r_lo, th.r_hi, "stop"};
    default: return {th.r_lo, th.r_hi, "interval"};
  }
}

// solve

struct SolveArgs {
  PriorFlags prior;
  double h = 0.05;
  double c = 0.0;
  std::optional<int> horizon;
  std::string out;
  std::string format = "csv";
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  check_format(a.format);
  const PriorSpec prior = a.prior.resolve();
  const HalfWidth h(a.h);
  const CostPerSample c(a.c);
  int horizon;
  if (a.horizon) {
    horizon = *a.horizon;
  } else {
    if (!(a.c > 0.0)) throw UsageError("c = 0 needs an explicit --horizon");
    horizon = bounds::log_horizon(a.c, mean_shape(prior), a.h);
  }
  if (horizon < 0) throw UsageError("--horizon must be nonnegative");

  const StoppingPolicy policy = backward_solve(prior, h, c, horizon);
  Provenance prov;
  prov.timestamp = utc_timestamp();
  prov.input_hash = fnv1a_hex("solve " + prior_to_json(prior).dump() + " h=" + num(a.h) +
                              " c=" + num(a.c) + " horizon=" + std::to_string(horizon));
  save_policy(output_path(a.out, "policy.json"), policy, prov);

  if (a.format == "json") {
    json rows = json::array();
    for (int t = 0; t <= policy.horizon; ++t) {
      const RegionRow row = region_row(policy, t);
      json entry{{"t", t}, {"r_lo", row.r_lo}, {"r_hi", row.r_hi}, {"marker", row.marker}};
      if (row.marker == "split") {
        json pieces = json::array();
        for (const auto& p : policy.region(t).pieces()) pieces.push_back({p.lo, p.hi});
        entry["pieces"] = pieces;
      }
      rows.push_back(entry);
    }
    out << json{{"horizon", policy.horizon}, {"t_lo", policy.t_lo}, {"t_up", policy.t_up},
                {"regions", rows}}
               .dump(1)
        << '\n';
    return 0;
  }
  out << "t,r_lo,r_hi,marker\n";
  for (int t = 0; t <= policy.horizon; ++t) {
    const RegionRow row = region_row(policy, t);
    out << t << ',' << row.r_lo << ',' << row.r_hi << ',' << row.marker << '\n';
  }
  return 0;
}

// calibrate

struct CalibrateArgs {
  PriorFlags prior;
  double h = 0.05;
  double alpha = 0.05;
  std::optional<int> horizon;
  std::string mode = "bayes";
  std::string theta_grid = "1001";
  std::string out;
};

json policy_summary(const StoppingPolicy& p, double miss, double expected_n) {
  return {{"c", p.c.value()}, {"t_lo", p.t_lo},     {"t_up", p.t_up},
          {"miss", miss},     {"expected_n", expected_n}};
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  const CalibrationMode mode = parse_mode(a.mode);
  const PriorSpec prior = a.prior.resolve();
  const HalfWidth h(a.h);
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  const int horizon = a.horizon.value_or(bounds::chebyshev_horizon(a.alpha, a.h));
  const LatticeModel model = build_model(prior, h, horizon);

  json result{{"mode", a.mode}, {"alpha", a.alpha}, {"horizon", horizon}};
  if (mode == CalibrationMode::Bayes) {
    const CalibrationResult r = calibrate_c(model, a.alpha);
    json trace = json::array();
    for (const auto& step : r.trace) trace.push_back({step.c, step.miss});
    result.update({{"c_star", r.c_star},
                   {"randomization_p", r.randomization_p},
                   {"achieved_miss", r.achieved_miss},
                   {"expected_n", r.expected_n},
                   {"trivial", r.trivial},
                   {"policy_lo", policy_summary(r.policy_lo, r.miss_lo, r.expected_n_lo)},
                   {"policy_hi", policy_summary(r.policy_hi, r.miss_hi, r.expected_n_hi)},
                   {"trace", trace}});
  } else {
    const auto grid = parse_theta_grid(a.theta_grid);
    auto family = [&](double c) { return scheme_from_policy(backward_solve(model, CostPerSample(c))); };
    const auto stop = family(1.0);
    const double stop_miss = worst_case_miss(stop, a.h, grid).miss;
    if (a.alpha >= stop_miss) {
      const auto perf = evaluate_bayes(stop, model.predictive);
      result.update({{"c_star", 1.0},
                     {"randomization_p", 1.0},
                     {"achieved_miss", stop_miss},
                     {"expected_n", perf.expected_n},
                     {"trivial", true}});
    } else {
      const ScalarCalibration r =
          calibrate_scalar(family, model.predictive, a.h, a.alpha, mode, grid,
                           {.lo = 1e-12, .hi = 1.0, .log_scale = true, .tolerance = 1e-4});
      const StoppingPolicy policy = backward_solve(model, CostPerSample(r.parameter));
      const auto scheme = scheme_from_policy(policy);
      const auto perf = evaluate_bayes(scheme, model.predictive);
      const WorstCase worst = worst_case_miss(scheme, a.h, grid);
      result.update({{"c_star", r.parameter},
                     {"randomization_p", 1.0},
                     {"achieved_miss", r.achieved_miss},
                     {"worst_theta", worst.theta},
                     {"expected_n", perf.expected_n},
                     {"bayes_miss", perf.miss_prob},
                     {"t_lo", policy.t_lo},
                     {"t_up", policy.t_up},
                     {"trivial", false},
                     {"evaluations", r.evaluations}});
    }
  }
  const std::string text = result.dump(1) + "\n";
  if (a.out.empty())
    out << text;
  else
    write_text(a.out, text);
  return 0;
}

// evaluate

struct EvaluateArgs {
  std::string policy;
  std::string theta_grid = "101";
  std::string format = "csv";
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  check_format(a.format);
  const auto grid = parse_theta_grid(a.theta_grid);
  const StoppingPolicy policy = load_policy(a.policy);
  const SchemeOnLattice scheme = scheme_from_policy(policy);
  const PerformanceReport report = performance_report(scheme, policy.prior, policy.h, grid);
  if (a.format == "json") {
    std::vector<double> coverage;
    for (double m : report.miss_given_theta) coverage.push_back(1.0 - m);
    out << json{{"theta", report.theta},
                {"expected_n", report.expected_n_given_theta},
                {"miss_prob", report.miss_given_theta},
                {"coverage", coverage},
                {"bayes", {{"expected_n", report.expected_n}, {"miss_prob", report.miss_bayes}}}}
               .dump(1)
        << '\n';
    return 0;
  }
  out << "theta,expected_n,miss_prob,coverage\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << num(report.theta[i]) << ',' << num(report.expected_n_given_theta[i]) << ','
        << num(report.miss_given_theta[i]) << ',' << num(1.0 - report.miss_given_theta[i]) << '\n';
  return 0;
}

// compare

struct CompareArgs {
  PriorFlags prior;
  double h = 0.05;
  std::string alpha;
  std::string c;
  std::optional<int> horizon;
  std::string mode = "bayes";
  std::string theta_grid = "201";
  std::string format = "csv";
};

struct CompareRow {
  std::string scheme;
  std::optional<double> target;
  double parameter;
  double coverage;
  double expected_n;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  check_format(a.format);
  const CalibrationMode mode = parse_mode(a.mode);
  if (!a.alpha.empty() && !a.c.empty()) throw UsageError("give either --alpha or --c, not both");
  const PriorSpec prior = a.prior.resolve();
  const HalfWidth h(a.h);
  const auto alphas = a.c.empty() ? parse_list(a.alpha.empty() ? "0.10,0.05" : a.alpha, "--alpha")
                                  : std::vector<double>{};
  const auto costs = a.c.empty() ? std::vector<double>{} : parse_list(a.c, "--c");
  for (double al : alphas)
    if (!(al > 0.0 && al < 1.0)) throw UsageError("alpha " + num(al) + " outside (0, 1)");
  for (double c : costs)
    if (!(c > 0.0)) throw UsageError("costs in --c must be positive");

  int horizon;
  if (a.horizon)
    horizon = *a.horizon;
  else if (!alphas.empty())
    horizon = bounds::chebyshev_horizon(*std::min_element(alphas.begin(), alphas.end()), a.h);
  else
    horizon = bounds::log_horizon(*std::min_element(costs.begin(), costs.end()), mean_shape(prior), a.h);

  const LatticeModel model = build_model(prior, h, horizon);
  const auto grid = parse_theta_grid(a.theta_grid);
  auto miss_of = [&](const SchemeOnLattice& s, const Triangular<double>& g) {
    return scheme_miss(s, g, a.h, mode, grid);
  };

  std::vector<CompareRow> rows;
  for (double c : costs) {
    const auto scheme = scheme_from_policy(backward_solve(model, CostPerSample(c)));
    rows.push_back({"optimal", std::nullopt, c, 1.0 - miss_of(scheme, model.predictive),
                    evaluate_bayes(scheme, model.predictive).expected_n});
  }
  for (double alpha : alphas) {
    if (mode == CalibrationMode::Bayes) {
      const CalibrationResult r = calibrate_c(model, alpha);
      rows.push_back({"optimal", alpha, r.c_star, 1.0 - r.achieved_miss, r.expected_n});
    } else {
      auto family = [&](double c) { return scheme_from_policy(backward_solve(model, CostPerSample(c))); };
      const auto r = calibrate_scalar(family, model.predictive, a.h, alpha, mode, grid,
                                      {.lo = 1e-12, .hi = 1.0, .log_scale = true, .tolerance = 1e-4});
      rows.push_back({"optimal", alpha, r.parameter, 1.0 - r.achieved_miss,
                      evaluate_bayes(family(r.parameter), model.predictive).expected_n});
    }
    const auto fss = calibrate_scalar([&](double n) { return fss_scheme(model, static_cast<int>(n)); },
                                      model.predictive, a.h, alpha, mode, grid,
                                      {.lo = 0.0, .hi = static_cast<double>(horizon), .integer = true});
    rows.push_back({"fss", alpha, fss.parameter, 1.0 - fss.achieved_miss, fss.parameter});

    auto conditional = [&](double beta) { return conditional_scheme(model, beta); };
    double beta_lo = 1e-6;
    while (beta_lo < 0.5 && prior.is_beta() && conditional_horizon(prior, a.h, beta_lo) > horizon)
      beta_lo *= 2.0;
    const auto cond = calibrate_scalar(conditional, model.predictive, a.h, alpha, mode, grid,
                                       {.lo = beta_lo, .hi = 0.999, .log_scale = true, .tolerance = 1e-5});
    rows.push_back({"conditional", alpha, cond.parameter, 1.0 - cond.achieved_miss,
                    evaluate_bayes(conditional(cond.parameter), model.predictive).expected_n});
  }
  for (double confidence : {0.90, 0.95, 0.99}) {
    const auto config = frey_table(a.h, confidence);
    if (!config) continue;
    const auto scheme = frey_scheme(*config, prior);
    const auto g = predictive_grid(prior, scheme.horizon);
    rows.push_back({"frey", 1.0 - confidence, config->gamma, 1.0 - miss_of(scheme, g),
                    evaluate_bayes(scheme, g).expected_n});
  }

  if (a.format == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"scheme", r.scheme},
                     {"target", r.target ? json(*r.target) : json(nullptr)},
                     {"parameter", r.parameter},
                     {"coverage", r.coverage},
                     {"expected_n", r.expected_n}});
    out << arr.dump(1) << '\n';
    return 0;
  }
  out << "scheme,target,parameter,coverage,expected_n\n";
  for (const auto& r : rows)
    out << r.scheme << ',' << (r.target ? num(*r.target) : "") << ',' << num(r.parameter) << ','
        << num(r.coverage) << ',' << num(r.expected_n) << '\n';
  return 0;
}

// step

struct StepArgs {
  std::string policy;
  std::string state;
};

std::string verdict(const StoppingPolicy& policy, int t, int s) {
  const Decision d = decide(policy, t, s);
  std::string line = (d.stop() ? "STOP t=" : "CONTINUE t=") + std::to_string(t) + " s=" + std::to_string(s);
  if (d.stop())
    line += " midpoint=" + num(d.midpoint) + " lower=" + num(d.lower) + " upper=" + num(d.upper);
  return line;
}

int cmd_step(const StepArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  const std::string bytes = read_text(a.policy);
  const json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) throw SchemaError(a.policy + ": not JSON");
  const StoppingPolicy policy = policy_from_json(doc);
  const std::string hash = fnv1a_hex(bytes);

  SessionState state;
  const bool resume = !a.state.empty() && fs::exists(a.state) && fs::file_size(a.state) > 0;
  if (resume) {
    state = session_from_json(json::parse(read_text(a.state)));
    if (state.policy_hash != hash) throw SchemaError("session state belongs to a different policy");
    if (state.t > policy.horizon) throw SchemaError("session state beyond the policy horizon");
  } else {
    state.policy_hash = hash;
    if (decide(policy, 0, 0).stop()) {
      state.stopped = true;
      out << verdict(policy, 0, 0) << '\n';
    }
  }

  auto persist = [&] {
    if (!a.state.empty()) write_text(a.state, session_to_json(state).dump() + "\n");
  };

  int invalid = 0;
  std::string line;
  while (std::getline(in, line)) {
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    if (state.stopped) {
      out << "ERROR observation refused: stopped at t=" << state.t << '\n';
      persist();
      err << "seqci: error: observation after STOP at t=" << state.t << '\n';
      return 3;
    }
    if (line != "0" && line != "1") {
      out << "ERROR invalid observation '" << line << "' (expected 0 or 1)\n";
      ++invalid;
      continue;
    }
    const int bit = line == "1" ? 1 : 0;
    state.transcript.push_back(bit);
    ++state.t;
    state.s += bit;
    state.stopped = decide(policy, state.t, state.s).stop();
    out << verdict(policy, state.t, state.s) << '\n';
  }
  persist();
  if (invalid > 0) {
    err << "seqci: error: " << invalid << " invalid observation line(s) skipped\n";
    return 1;
  }
  return 0;
}

// simulate

struct SimulateArgs {
  std::string policy;
  PriorFlags prior;
  double h = 0.05;
  std::optional<double> frey_k;
  std::optional<double> frey_gamma;
  std::string theta_grid = "0.1,0.3,0.5";
  long long reps = 100000;
  std::uint64_t seed = 1;
  std::string format = "csv";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  check_format(a.format);
  if (a.frey_k.has_value() != a.frey_gamma.has_value())
    throw UsageError("--frey-k and --frey-gamma go together");
  if (a.frey_k && !a.policy.empty()) throw UsageError("give either --policy or a Frey rule");
  if (!a.frey_k && a.policy.empty()) throw UsageError("--policy or --frey-k/--frey-gamma required");
  if (a.reps < 1) throw UsageError("--reps must be positive");
  const auto grid = parse_theta_grid(a.theta_grid);

  SchemeOnLattice scheme;
  double h = a.h;
  if (a.frey_k) {
    scheme = frey_scheme(FreyConfig(*a.frey_k, *a.frey_gamma, a.h), a.prior.resolve());
  } else {
    const StoppingPolicy policy = load_policy(a.policy);
    h = policy.h;
    scheme = scheme_from_policy(policy);
  }

  json arr = json::array();
  if (a.format == "csv")
    out << "theta,reps,seed,mean_t,se_t,miss_rate,se_miss,exact_expected_n,exact_miss\n";
  for (double theta : grid) {
    const SimulationSummary sim = simulate(scheme, theta, h, a.reps, a.seed);
    const ThetaPerformance exact = evaluate_at_theta(scheme, theta, h);
    if (a.format == "json") {
      arr.push_back({{"theta", theta},
                     {"reps", a.reps},
                     {"seed", a.seed},
                     {"mean_t", sim.mean_t},
                     {"se_t", sim.se_t},
                     {"miss_rate", sim.miss_rate},
                     {"se_miss", sim.se_miss},
                     {"exact_expected_n", exact.expected_n},
                     {"exact_miss", exact.miss_prob}});
    } else {
      out << num(theta) << ',' << a.reps << ',' << a.seed << ',' << num(sim.mean_t) << ','
          << num(sim.se_t) << ',' << num(sim.miss_rate) << ',' << num(sim.se_miss) << ','
          << num(exact.expected_n) << ',' << num(exact.miss_prob) << '\n';
    }
  }
  if (a.format == "json") out << arr.dump(1) << '\n';
  return 0;
}

// bounds

struct BoundsArgs {
  double a = 1.0;
  double h = 0.05;
  std::optional<double> c;
  std::optional<int> horizon;
  std::optional<double> alpha;
  int t = 1;
  std::string c_grid;
  std::string format = "csv";
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
  check_format(a.format);
  const PriorSpec prior = PriorSpec::symmetric_beta(a.a);
  const HalfWidth h(a.h);
  if (a.t < 1) throw UsageError("--t must be at least 1");

  if (!a.c_grid.empty()) {
    auto costs = parse_list(a.c_grid, "--c-grid");
    for (double c : costs)
      if (!(c > 0.0)) throw UsageError("costs in --c-grid must be positive");
    std::sort(costs.begin(), costs.end(), std::greater<>());
    const int horizon = a.horizon.value_or(bounds::log_horizon(costs.back(), a.a, a.h));
    const LatticeModel model = build_model(prior, h, horizon);
    const double c0 = model.coverage.comp_coverage(0, 0);
    json arr = json::array();
    if (a.format == "csv") out << "c,log_lower_limit,t_lo,expected_n,t_up,log_horizon\n";
    for (double c : costs) {
      const StoppingPolicy policy = backward_solve(model, CostPerSample(c));
      const double en = evaluate_bayes(scheme_from_policy(policy), model.predictive).expected_n;
      const int n = bounds::log_horizon(c, a.a, a.h);
      const int nu = bounds::lower_limit_valid(c, n, c0) ? bounds::log_lower_limit(c, a.a, a.h, n) : 0;
      if (a.format == "json")
        arr.push_back({{"c", c}, {"log_lower_limit", nu}, {"t_lo", policy.t_lo}, {"expected_n", en},
                       {"t_up", policy.t_up}, {"log_horizon", n}});
      else
        out << num(c) << ',' << nu << ',' << policy.t_lo << ',' << num(en) << ',' << policy.t_up << ','
            << n << '\n';
    }
    if (a.format == "json") out << arr.dump(1) << '\n';
    return 0;
  }

  if (!a.c) throw UsageError("bounds needs --c or --c-grid");
  const double c = *a.c;
  if (!(c > 0.0)) throw UsageError("--c must be positive");
  const int n = a.horizon.value_or(bounds::log_horizon(c, a.a, a.h));
  const double c0 = optimal_midpoint(PosteriorState(0, 0, prior), h).comp_coverage;
  const auto parts = bounds::fractional_parts(a.a);
  const auto sigma = bounds::chebyshev_sigma_bound(a.t, a.a, a.a);

  std::vector<std::pair<std::string, json>> table{
      {"c", c},
      {"a", a.a},
      {"h", a.h},
      {"n_a", parts.n_a},
      {"delta_a", parts.delta_a},
      {"C_0", c0},
      {"log_horizon", bounds::log_horizon(c, a.a, a.h)},
      {"crude_horizon_bound", bounds::crude_horizon_bound(c, a.a, a.h)},
      {"log_lower_limit", bounds::log_lower_limit(c, a.a, a.h, n)},
      {"lower_limit_valid", bounds::lower_limit_valid(c, n, c0)},
      {"t", a.t},
      {"chernoff_upper", bounds::chernoff_upper(a.t, a.a, a.h)},
      {"incbeta_lower", bounds::incbeta_lower(a.t, a.a, a.h)},
      {"sigma_exact_max", sigma.exact_max},
      {"sigma_envelope", sigma.envelope},
      {"bayes_risk_bound", bounds::bayes_risk_bound(a.t, a.h)},
  };
  if (a.alpha) table.emplace_back("chebyshev_horizon", bounds::chebyshev_horizon(*a.alpha, a.h));

  if (a.format == "json") {
    json obj = json::object();
    for (const auto& [k, v] : table) obj[k] = v;
    out << obj.dump(1) << '\n';
    return 0;
  }
  out << "bound,value\n";
  for (const auto& [k, v] : table) {
    out << k << ',';
    if (v.is_number_float())
      out << num(v.get<double>());
    else
      out << v.dump();
    out << '\n';
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Optimal sequential fixed-width intervals for a Bernoulli proportion", "seqci"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "solve the stopping problem for one cost c");
  solve.prior.add(s);
  s->add_option("--h", solve.h, "interval half-width");
  s->add_option("--c", solve.c, "cost per sample")->required();
  s->add_option("--horizon", solve.horizon, "lattice horizon (default: log_horizon bound)");
  s->add_option("--out", solve.out, "policy JSON path (default: policy.json)");
  s->add_option("--format", solve.format, "region table format: csv or json");

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "find the cost meeting a miss-probability target");
  cal.prior.add(c);
  c->add_option("--h", cal.h, "interval half-width");
  c->add_option("--alpha", cal.alpha, "target miss probability")->required();
  c->add_option("--horizon", cal.horizon, "lattice horizon (default: Chebyshev horizon)");
  c->add_option("--mode", cal.mode, "bayes or worst-case");
  c->add_option("--theta-grid", cal.theta_grid, "worst-case theta grid: N points or a list");
  c->add_option("--out", cal.out, "write the JSON result here instead of stdout");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "exact per-theta performance of a policy");
  e->add_option("--policy,policy", ev.policy, "policy JSON")->required();
  e->add_option("--theta-grid", ev.theta_grid, "N points or a comma-separated list");
  e->add_option("--format", ev.format, "csv or json");

  CompareArgs cmp;
  auto* m = app.add_subcommand("compare", "optimal policy against FSS, conditional and Frey rules");
  cmp.prior.add(m);
  m->add_option("--h", cmp.h, "interval half-width");
  m->add_option("--alpha", cmp.alpha, "comma-separated miss targets (default 0.10,0.05)");
  m->add_option("--c", cmp.c, "comma-separated costs instead of targets");
  m->add_option("--horizon", cmp.horizon, "lattice horizon");
  m->add_option("--mode", cmp.mode, "bayes or worst-case");
  m->add_option("--theta-grid", cmp.theta_grid, "worst-case theta grid");
  m->add_option("--format", cmp.format, "csv or json");

  StepArgs st;
  auto* p = app.add_subcommand("step", "apply a policy to 0/1 observations read from stdin");
  p->add_option("--policy,policy", st.policy, "policy JSON")->required();
  p->add_option("--state", st.state, "session file to resume from and save to");

  SimulateArgs sim;
  auto* r = app.add_subcommand("simulate", "Monte Carlo check of a policy or a Frey rule");
  r->add_option("--policy", sim.policy, "policy JSON");
  sim.prior.add(r);
  r->add_option("--h", sim.h, "half-width for a Frey rule");
  r->add_option("--frey-k", sim.frey_k, "Frey shrinkage k");
  r->add_option("--frey-gamma", sim.frey_gamma, "Frey nominal level gamma");
  r->add_option("--theta-grid", sim.theta_grid, "N points or a comma-separated list");
  r->add_option("--reps", sim.reps, "replications per theta");
  r->add_option("--seed", sim.seed, "base seed");
  r->add_option("--format", sim.format, "csv or json");

  BoundsArgs bd;
  auto* b = app.add_subcommand("bounds", "closed-form bounds for a symmetric Beta(a, a) prior");
  b->add_option("--prior-a", bd.a, "prior shape a");
  b->add_option("--h", bd.h, "interval half-width");
  b->add_option("--c", bd.c, "cost per sample");
  b->add_option("--horizon", bd.horizon, "horizon N for the lower-limit bound");
  b->add_option("--alpha", bd.alpha, "miss target for the Chebyshev horizon");
  b->add_option("--t", bd.t, "time index for the per-t bounds");
  b->add_option("--c-grid", bd.c_grid, "comma-separated costs: emit t_lo, E[T], t_up series");
  b->add_option("--format", bd.format, "csv or json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& ex) {
    std::string msg = ex.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "seqci: usage error: " << msg << '\n';
    return 2;
  }

  try {
    if (*s) return cmd_solve(solve, out);
    if (*c) return cmd_calibrate(cal, out);
    if (*e) return cmd_evaluate(ev, out);
    if (*m) return cmd_compare(cmp, out);
    if (*p) return cmd_step(st, in, out, err);
    if (*r) return cmd_simulate(sim, out);
    if (*b) return cmd_bounds(bd, out);
  } catch (const UsageError& ex) {
    err << "seqci: usage error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::string msg = ex.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "seqci: error: " << msg << '\n';
    return 1;
  }
  return 2;
}

}  // namespace seqci::cli
