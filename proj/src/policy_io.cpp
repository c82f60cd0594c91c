#include "seqci/policy_io.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <numeric>

#include "seqci/errors.hpp"

namespace seqci {

using nlohmann::json;

namespace {

json grid_to_json(const Triangular<double>& grid) {
  json rows = json::array();
  for (int t = 0; t <= grid.horizon(); ++t) {
    const auto r = grid.row(t);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Triangular<double> grid_from_json(const json& rows, int horizon, const char* name) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != horizon + 1)
    throw SchemaError(std::string(name) + ": expected " + std::to_string(horizon + 1) + " rows");
  Triangular<double> grid(horizon);
  for (int t = 0; t <= horizon; ++t) {
    const json& row = rows[static_cast<std::size_t>(t)];
    if (!row.is_array() || static_cast<int>(row.size()) != t + 1)
      throw SchemaError(std::string(name) + ": row " + std::to_string(t) + " has wrong length");
    for (int s = 0; s <= t; ++s) grid(t, s) = row[static_cast<std::size_t>(s)].get<double>();
  }
  return grid;
}

// "stop", "sample", [lo, hi], or [[lo, hi], ...] for a split region.
json region_to_json(const SamplingRegion& r, int t) {
  if (r.empty()) return "stop";
  if (r == SamplingInterval{0, t}) return "sample";
  if (r.is_interval()) return json::array({r.lo(), r.hi()});
  json pieces = json::array();
  for (const auto& p : r.pieces()) pieces.push_back({p.lo, p.hi});
  return pieces;
}

SamplingInterval interval_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw SchemaError("region piece must be [lo, hi]");
  return {j[0].get<int>(), j[1].get<int>()};
}

SamplingRegion region_from_json(const json& j, int t) {
  if (j.is_string()) {
    const auto tag = j.get<std::string>();
    if (tag == "stop") return {};
    if (tag == "sample") return SamplingInterval{0, t};
    throw SchemaError("unknown region marker '" + tag + "'");
  }
  if (!j.is_array() || j.empty()) throw SchemaError("region must be a marker, [lo, hi] or a list of pieces");
  std::vector<SamplingInterval> pieces;
  if (j[0].is_array())
    for (const auto& p : j) pieces.push_back(interval_from_json(p));
  else
    pieces.push_back(interval_from_json(j));
  if (pieces.back().hi > t) throw SchemaError("region at t=" + std::to_string(t) + " outside the lattice row");
  try {
    return SamplingRegion::from_pieces(std::move(pieces));
  } catch (const DomainError& e) {
    throw SchemaError("region at t=" + std::to_string(t) + ": " + e.what());
  }
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json prior_to_json(const PriorSpec& prior) {
  if (prior.is_beta()) {
    const BetaParams b = prior.beta_params();
    return {{"kind", "beta"}, {"p", b.p}, {"q", b.q}};
  }
  json nodes = json::array();
  for (const auto& n : prior.nodes()) nodes.push_back({n.theta, n.density});
  return {{"kind", "tabulated"}, {"nodes", nodes}};
}

PriorSpec prior_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "beta") return PriorSpec::beta(j.at("p").get<double>(), j.at("q").get<double>());
  if (kind == "tabulated") {
    std::vector<PriorSpec::Node> nodes;
    for (const auto& n : j.at("nodes")) {
      if (!n.is_array() || n.size() != 2) throw SchemaError("prior node must be [theta, density]");
      nodes.push_back({n[0].get<double>(), n[1].get<double>()});
    }
    return PriorSpec::tabulated(std::move(nodes));
  }
  throw SchemaError("unknown prior kind '" + kind + "'");
}

json policy_to_json(const StoppingPolicy& policy, const Provenance& provenance) {
  json regions = json::array();
  for (int t = 0; t <= policy.horizon; ++t) regions.push_back(region_to_json(policy.region(t), t));
  return {{"schema_version", kPolicySchemaVersion},
          {"prior", prior_to_json(policy.prior)},
          {"h", static_cast<double>(policy.h)},
          {"c", policy.c.value()},
          {"horizon", policy.horizon},
          {"t_lo", policy.t_lo},
          {"t_up", policy.t_up},
          {"regions", regions},
          {"estimates", grid_to_json(policy.estimates)},
          {"comp_coverage", grid_to_json(policy.comp_coverage)},
          {"provenance",
           {{"tool_version", provenance.tool_version},
            {"timestamp", provenance.timestamp},
            {"input_hash", provenance.input_hash}}}};
}

StoppingPolicy policy_from_json(const json& j, Provenance* provenance) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kPolicySchemaVersion)
      throw SchemaError("unsupported policy schema_version " + std::to_string(version));
    const PriorSpec prior = prior_from_json(j.at("prior"));
    const HalfWidth h(j.at("h").get<double>());
    const CostPerSample c(j.at("c").get<double>());
    const int horizon = j.at("horizon").get<int>();
    if (horizon < 0) throw SchemaError("negative horizon");

    Triangular<double> estimates = grid_from_json(j.at("estimates"), horizon, "estimates");
    Triangular<double> comp = grid_from_json(j.at("comp_coverage"), horizon, "comp_coverage");
    const json& regions = j.at("regions");
    if (!regions.is_array() || static_cast<int>(regions.size()) != horizon + 1)
      throw SchemaError("regions: expected one entry per t");

    PolicyGrid grid = solve_values(comp, predictive_grid(prior, std::max(0, horizon - 1)), c, horizon);
    for (int t = 0; t <= horizon; ++t)
      if (region_from_json(regions[static_cast<std::size_t>(t)], t) != grid.regions[static_cast<std::size_t>(t)])
        throw SchemaError("stored region at t=" + std::to_string(t) +
                          " disagrees with the recomputed policy");
    const auto [t_lo, t_up] = extract_limits(grid);
    if (t_lo != j.at("t_lo").get<int>() || t_up != j.at("t_up").get<int>())
      throw SchemaError("stored t_lo/t_up disagree with the recomputed policy");

    if (provenance) {
      const json& p = j.at("provenance");
      provenance->tool_version = p.at("tool_version").get<std::string>();
      provenance->timestamp = p.at("timestamp").get<std::string>();
      provenance->input_hash = p.at("input_hash").get<std::string>();
    }
    return StoppingPolicy{prior, h, c, horizon, std::move(grid), std::move(estimates), std::move(comp),
                          t_lo, t_up};
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed policy: ") + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const StoppingPolicy& policy,
                 const Provenance& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << policy_to_json(policy, provenance).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

StoppingPolicy load_policy(const std::filesystem::path& path, Provenance* provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return policy_from_json(j, provenance);
}

json session_to_json(const SessionState& state) {
  return {{"policy_hash", state.policy_hash},
          {"t", state.t},
          {"s", state.s},
          {"transcript", state.transcript},
          {"stopped", state.stopped}};
}

SessionState session_from_json(const json& j) {
  try {
    SessionState state;
    state.policy_hash = j.at("policy_hash").get<std::string>();
    state.t = j.at("t").get<int>();
    state.s = j.at("s").get<int>();
    state.transcript = j.at("transcript").get<std::vector<int>>();
    state.stopped = j.at("stopped").get<bool>();
    for (int bit : state.transcript)
      if (bit != 0 && bit != 1) throw SchemaError("session transcript holds a non-bit");
    if (state.t != static_cast<int>(state.transcript.size()) ||
        state.s != std::accumulate(state.transcript.begin(), state.transcript.end(), 0))
      throw SchemaError("session state disagrees with its transcript");
    return state;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed session state: ") + e.what());
  }
}

}  // namespace seqci
