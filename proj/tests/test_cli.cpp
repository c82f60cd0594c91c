#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "seqci/cli.hpp"
#include "seqci/performance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = seqci::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream ss(text);
  for (std::string l; std::getline(ss, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) v.push_back(f);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("seqci_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool single_line(const std::string& s) { return !s.empty() && s.find('\n') == s.size() - 1; }

// Policy at a = 1, h = 0.05, c = 1e-4 on horizon 700, built once.
const fs::path& reference_policy() {
  static const fs::path path = [] {
    const fs::path p = scratch("reference") / "policy.json";
    const auto r = run({"solve", "--c", "1e-4", "--horizon", "700", "--out", p.string()});
    REQUIRE(r.code == 0);
    return p;
  }();
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve writes the region table and a policy file") {
  const fs::path dir = scratch("solve");
  const auto r = run({"solve", "--c", "1e-4", "--horizon", "700", "--out", (dir / "p.json").string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows.front() == "t,r_lo,r_hi,marker");
  CHECK(rows.size() == 702);
  CHECK(rows[1] == "0,-1,1,sample");
  CHECK(split(rows[1 + 58])[3] == "sample");
  CHECK(split(rows[1 + 59])[3] == "interval");
  CHECK(split(rows[1 + 560])[3] == "interval");
  CHECK(split(rows[1 + 561])[3] == "stop");
  const json policy = json::parse(slurp(dir / "p.json"));
  CHECK(policy["t_lo"] == 59);
  CHECK(policy["t_up"] == 561);

  const auto stop = run({"solve", "--c", "1", "--horizon", "20", "--format", "json", "--out", (dir / "q.json").string()});
  REQUIRE(stop.code == 0);
  CHECK(json::parse(stop.out)["t_up"] == 0);
}

TEST_CASE("solve marks split regions") {
  const fs::path dir = scratch("split");
  const auto r = run({"solve", "--c", "1e-2", "--horizon", "60", "--out", (dir / "p.json").string()});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out)[1 + 20] == "20,1,19,split");
  const auto j = run({"solve", "--c", "1e-2", "--horizon", "60", "--format", "json", "--out", (dir / "q.json").string()});
  CHECK(json::parse(j.out)["regions"][20]["pieces"] == json::parse("[[2, 2], [18, 18]]"));
}

TEST_CASE("solve is deterministic apart from the timestamp") {
  const fs::path dir = scratch("determinism");
  auto load = [&](const std::string& name) {
    REQUIRE(run({"solve", "--c", "1e-3", "--h", "0.1", "--out", (dir / name).string()}).code == 0);
    json j = json::parse(slurp(dir / name));
    j["provenance"].erase("timestamp");
    return j;
  };
  CHECK(load("a.json") == load("b.json"));
}

TEST_CASE("SEQCI_OUT_DIR sets the default output location") {
  const fs::path dir = scratch("outdir");
  ::setenv("SEQCI_OUT_DIR", dir.c_str(), 1);
  const auto r = run({"solve", "--c", "1e-2"});
  ::unsetenv("SEQCI_OUT_DIR");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "policy.json"));
}

TEST_CASE("calibrate") {
  const auto trivial = run({"calibrate", "--alpha", "0.95", "--horizon", "50"});
  REQUIRE(trivial.code == 0);
  const json t = json::parse(trivial.out);
  CHECK(t["trivial"] == true);
  CHECK(t["expected_n"] == 0.0);

  const auto r = run({"calibrate", "--alpha", "0.1", "--h", "0.1"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["trivial"] == false);
  CHECK(std::abs(j["achieved_miss"].get<double>() - 0.1) <= 1e-3);
  CHECK(j["policy_lo"]["c"].get<double>() < j["policy_hi"]["c"].get<double>());

  const auto wc = run({"calibrate", "--alpha", "0.1", "--h", "0.1", "--mode", "worst-case", "--theta-grid", "41",
                       "--horizon", "400"});
  REQUIRE(wc.code == 0);
  const json w = json::parse(wc.out);
  const double c_star = w["c_star"].get<double>();
  CHECK(w["achieved_miss"].get<double>() <= 0.1);
  // Worst-case miss is step-like in c: check the bracket collapsed onto the step.
  const auto model = seqci::build_model(seqci::PriorSpec::symmetric_beta(1), seqci::HalfWidth(0.1), 400);
  const auto grid = seqci::theta_grid(41);
  auto miss_at = [&](double c) {
    const auto s = seqci::scheme_from_policy(seqci::backward_solve(model, seqci::CostPerSample(c)));
    return seqci::worst_case_miss(s, 0.1, grid).miss;
  };
  CHECK(miss_at(c_star) == w["achieved_miss"].get<double>());
  CHECK(miss_at(c_star * (1 + 1e-6)) > 0.1);

  const auto bad = run({"calibrate", "--alpha", "1.5"});
  CHECK(bad.code == 2);
  CHECK(single_line(bad.err));
  CHECK(run({"calibrate", "--alpha", "0.1", "--mode", "minimax"}).code == 2);
}

TEST_CASE("evaluate") {
  const fs::path dir = scratch("evaluate");
  const fs::path p = dir / "stop.json";
  REQUIRE(run({"solve", "--c", "1", "--horizon", "5", "--out", p.string()}).code == 0);
  const auto r = run({"evaluate", p.string(), "--theta-grid", "0,0.44,0.45,0.5,0.56,1"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "theta,expected_n,miss_prob,coverage");
  const double expect[] = {0, 0, 1, 1, 0, 0};
  for (int i = 0; i < 6; ++i) {
    const auto f = split(rows[static_cast<std::size_t>(i) + 1]);
    CHECK(std::stod(f[1]) == 0.0);
    CHECK(std::stod(f[3]) == expect[i]);
  }

  const auto empty = run({"evaluate", "--policy", p.string(), "--theta-grid", "0"});
  CHECK(empty.code == 2);
  CHECK(single_line(empty.err));
  const auto missing = run({"evaluate", "--policy", (dir / "nope.json").string()});
  CHECK(missing.code == 1);
  CHECK(single_line(missing.err));
}

TEST_CASE("compare") {
  const auto r = run({"compare", "--alpha", "0.1", "--h", "0.1", "--horizon", "500"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows[0] == "scheme,target,parameter,coverage,expected_n");
  std::map<std::string, int> count;
  std::map<std::string, double> en;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i]);
    ++count[f[0]];
    en[f[0]] = std::stod(f[4]);
  }
  CHECK(count["optimal"] == 1);
  CHECK(count["fss"] == 1);
  CHECK(count["conditional"] == 1);
  CHECK(count["frey"] == 3);
  CHECK(en["optimal"] <= en["fss"]);
  CHECK(en["optimal"] <= en["conditional"]);
}

TEST_CASE("step") {
  const fs::path dir = scratch("step");
  const std::string policy = reference_policy().string();

  std::string zeros;
  for (int i = 0; i < 58; ++i) zeros += "0\n";
  const auto first = run({"step", "--policy", policy}, zeros);
  CHECK(first.code == 0);
  const auto out = lines(first.out);
  REQUIRE(out.size() == 58);
  CHECK(out[0] == "CONTINUE t=1 s=0");
  CHECK(out[57] == "CONTINUE t=58 s=0");

  // Resuming from a state file reproduces the one-shot verdicts.
  std::string bits;
  for (int i = 0; i < 120; ++i) bits += (i % 3 == 0 ? "1\n" : "0\n");
  const auto whole = run({"step", "--policy", policy}, bits);
  const fs::path state = dir / "state.json";
  const auto part1 = run({"step", "--policy", policy, "--state", state.string()}, bits.substr(0, 100));
  const auto part2 = run({"step", "--policy", policy, "--state", state.string()}, bits.substr(100));
  CHECK(part1.code == 0);
  CHECK(part2.code == 0);
  CHECK(part1.out + part2.out == whole.out);

  const auto bad = run({"step", "--policy", policy}, "0\nx\n1\n");
  CHECK(bad.code == 1);
  const auto bad_lines = lines(bad.out);
  REQUIRE(bad_lines.size() == 3);
  CHECK(bad_lines[1] == "ERROR invalid observation 'x' (expected 0 or 1)");
  CHECK(bad_lines[2] == "CONTINUE t=2 s=1");
}

TEST_CASE("step on a policy that stops at once") {
  const fs::path dir = scratch("step_stop");
  const fs::path p = dir / "stop.json";
  REQUIRE(run({"solve", "--c", "1", "--horizon", "5", "--out", p.string()}).code == 0);
  const auto none = run({"step", p.string()});
  CHECK(none.code == 0);
  CHECK(none.out.rfind("STOP t=0 s=0 midpoint=0.5", 0) == 0);

  const auto refused = run({"step", p.string()}, "1\n");
  CHECK(refused.code == 3);
  CHECK(lines(refused.out).back() == "ERROR observation refused: stopped at t=0");
  CHECK(single_line(refused.err));
}

TEST_CASE("step rejects a state file from another policy") {
  const fs::path dir = scratch("step_foreign");
  const fs::path state = dir / "state.json";
  REQUIRE(run({"step", reference_policy().string(), "--state", state.string()}, "0\n").code == 0);
  const fs::path other = dir / "other.json";
  REQUIRE(run({"solve", "--c", "1e-2", "--out", other.string()}).code == 0);
  const auto r = run({"step", other.string(), "--state", state.string()}, "0\n");
  CHECK(r.code == 1);
  CHECK(single_line(r.err));
}

TEST_CASE("simulate") {
  const auto a = run({"simulate", "--h", "0.05", "--frey-k", "6", "--frey-gamma", "0.0433", "--reps", "2000",
                      "--seed", "9"});
  const auto b = run({"simulate", "--h", "0.05", "--frey-k", "6", "--frey-gamma", "0.0433", "--reps", "2000",
                      "--seed", "9"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto rows = lines(a.out);
  CHECK(rows[0] == "theta,reps,seed,mean_t,se_t,miss_rate,se_miss,exact_expected_n,exact_miss");
  CHECK(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i]);
    CHECK(std::abs(std::stod(f[3]) - std::stod(f[7])) <= 4 * std::stod(f[4]));
  }
  CHECK(run({"simulate", "--h", "0.05"}).code == 2);
}

TEST_CASE("bounds") {
  const auto r = run({"bounds", "--c", "1e-4", "--alpha", "0.05"});
  REQUIRE(r.code == 0);
  std::map<std::string, std::string> kv;
  for (const auto& l : lines(r.out)) {
    const auto f = split(l);
    if (f.size() == 2) kv[f[0]] = f[1];
  }
  CHECK(kv["log_horizon"] == "1978");
  CHECK(kv["C_0"] == "0.9");
  CHECK(kv["chebyshev_horizon"] == "2001");

  const auto series = run({"bounds", "--h", "0.1", "--c-grid", "1e-2,1e-3"});
  REQUIRE(series.code == 0);
  const auto rows = lines(series.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "c,log_lower_limit,t_lo,expected_n,t_up,log_horizon");
  for (int i = 1; i <= 2; ++i) {
    const auto f = split(rows[static_cast<std::size_t>(i)]);
    CHECK(std::stod(f[2]) <= std::stod(f[3]));
    CHECK(std::stod(f[3]) <= std::stod(f[4]));
    CHECK(std::stod(f[4]) <= std::stod(f[5]));
  }
}

TEST_CASE("usage errors") {
  for (const auto& args : std::vector<std::vector<std::string>>{{}, {"frobnicate"}, {"solve"}, {"solve", "--c", "abc"}}) {
    const auto r = run(args);
    CHECK(r.code == 2);
    CHECK(single_line(r.err));
  }
  CHECK(run({"--version"}).code == 0);
}

}
