#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "seqci/bayes_midpoint.hpp"
#include "seqci/prior_posterior.hpp"
#include "seqci/triangular.hpp"

namespace seqci {

/// Lagrange multiplier: cost charged per observation.
class CostPerSample {
 public:
  explicit CostPerSample(double c);
  double value() const noexcept { return c_; }
  operator double() const noexcept { return c_; }

 private:
  double c_;
};

/// Integer interval {lo, ..., hi} of success counts; empty when lo > hi.
struct SamplingInterval {
  int lo = 0;
  int hi = -1;

  bool empty() const noexcept { return lo > hi; }
  bool contains(int s) const noexcept { return s >= lo && s <= hi; }
  int size() const noexcept { return empty() ? 0 : hi - lo + 1; }
  friend bool operator==(const SamplingInterval&, const SamplingInterval&) = default;
};

/// Sampling set Omega_t: sorted, disjoint, non-adjacent integer intervals.
/// Usually a single interval, but edge cells whose mid-point is pinned at h
/// can split it for large c.
class SamplingRegion {
 public:
  SamplingRegion() = default;
  SamplingRegion(SamplingInterval interval);  // NOLINT: implicit on purpose

  /// Throws DomainError unless the pieces are nonempty, sorted and separated.
  static SamplingRegion from_pieces(std::vector<SamplingInterval> pieces);

  /// Adds s, which must exceed every member.
  void push_back(int s);

  bool empty() const noexcept { return pieces_.empty(); }
  bool is_interval() const noexcept { return pieces_.size() <= 1; }
  bool contains(int s) const noexcept;
  int size() const noexcept;
  /// Smallest interval containing the set.
  SamplingInterval hull() const noexcept;
  int lo() const noexcept { return hull().lo; }
  int hi() const noexcept { return hull().hi; }
  const std::vector<SamplingInterval>& pieces() const noexcept { return pieces_; }

  friend bool operator==(const SamplingRegion&, const SamplingRegion&) = default;

 private:
  std::vector<SamplingInterval> pieces_;
};

/// Everything the backward recursion consumes that does not depend on c:
/// optimal mid-points, conditional complementary coverage, and g_{t+1}(s).
struct LatticeModel {
  PriorSpec prior;
  HalfWidth h;
  int horizon;
  CoverageGrid coverage;
  Triangular<double> predictive;

  LatticeModel truncated(int n) const;
};

LatticeModel build_model(const PriorSpec& prior, HalfWidth h, int horizon);

struct PolicyGrid {
  int horizon = 0;
  Triangular<double> values;           // V_t(s)
  Triangular<double> continue_values;  // V~_t(s); zero on the last row
  std::vector<SamplingRegion> regions;
};

struct StoppingPolicy {
  PriorSpec prior;
  HalfWidth h;
  CostPerSample c;
  int horizon;
  PolicyGrid grid;
  Triangular<double> estimates;
  Triangular<double> comp_coverage;
  int t_lo;
  int t_up;

  const SamplingRegion& region(int t) const { return grid.regions.at(static_cast<std::size_t>(t)); }
};

/// Finite-horizon backward induction. Stops on ties (C_t = c + V~_t).
/// Uses the first `horizon` rows of the model (default: all of them).
StoppingPolicy backward_solve(const LatticeModel& model, CostPerSample c,
                              std::optional<int> horizon = std::nullopt);
StoppingPolicy backward_solve(const PriorSpec& prior, HalfWidth h, CostPerSample c, int horizon);

/// Backward recursion only, from precomputed coverage and predictive grids.
PolicyGrid solve_values(const Triangular<double>& comp_coverage,
                        const Triangular<double>& predictive, CostPerSample c, int horizon);

/// (t_lo, t_up): t_up is the first t with an empty sampling region; t_lo the
/// largest tau such that every t < tau samples at all s.
std::pair<int, int> extract_limits(const PolicyGrid& grid);

struct Thresholds {
  enum class Kind { AllSampling, AllStopping, Interval };
  Kind kind;
  int r_lo = 0;  // sampling region is the open interval (r_lo, r_hi)
  int r_hi = 0;
};

/// Throws NonIntervalRegion when Omega_t has more than one piece.
Thresholds thresholds(const PolicyGrid& grid, int t);

struct Decision {
  enum class Kind { Continue, Stop };
  Kind kind;
  double midpoint = 0.0;
  double lower = 0.0;  // interval ends, cropped to [0, 1]
  double upper = 0.0;

  bool stop() const noexcept { return kind == Kind::Stop; }
};

Decision decide(const StoppingPolicy& policy, int t, int s);

}  // namespace seqci
