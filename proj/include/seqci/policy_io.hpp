#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "seqci/dp_policy.hpp"

namespace seqci {

inline constexpr int kPolicySchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct Provenance {
  std::string tool_version = kToolVersion;
  std::string timestamp;
  std::string input_hash;
};

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

nlohmann::json prior_to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const nlohmann::json& j);

/// Regions are written per t as "sample", "stop" or [lo, hi]. Value grids are
/// not stored: loading recomputes them from comp_coverage, the prior and c,
/// and rejects the file if the recomputed regions differ.
nlohmann::json policy_to_json(const StoppingPolicy& policy, const Provenance& provenance);
StoppingPolicy policy_from_json(const nlohmann::json& j, Provenance* provenance = nullptr);

void save_policy(const std::filesystem::path& path, const StoppingPolicy& policy,
                 const Provenance& provenance);
StoppingPolicy load_policy(const std::filesystem::path& path, Provenance* provenance = nullptr);

/// Live position of a stepping session on a policy's lattice.
struct SessionState {
  std::string policy_hash;
  int t = 0;
  int s = 0;
  std::vector<int> transcript;
  bool stopped = false;
};

nlohmann::json session_to_json(const SessionState& state);
/// Throws SchemaError when s != sum(transcript) or t != transcript length.
SessionState session_from_json(const nlohmann::json& j);

}  // namespace seqci
