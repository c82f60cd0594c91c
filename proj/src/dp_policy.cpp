#include "seqci/dp_policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqci/errors.hpp"

namespace seqci {

CostPerSample::CostPerSample(double c) : c_(c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw DomainError("cost per sample must be finite and nonnegative");
}

SamplingRegion::SamplingRegion(SamplingInterval interval) {
  if (!interval.empty()) pieces_.push_back(interval);
}

SamplingRegion SamplingRegion::from_pieces(std::vector<SamplingInterval> pieces) {
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].empty() || pieces[i].lo < 0) throw DomainError("sampling region piece is empty or negative");
    if (i > 0 && pieces[i].lo <= pieces[i - 1].hi + 1)
      throw DomainError("sampling region pieces must be sorted and separated");
  }
  SamplingRegion r;
  r.pieces_ = std::move(pieces);
  return r;
}

void SamplingRegion::push_back(int s) {
  if (!pieces_.empty() && s <= pieces_.back().hi) throw DomainError("sampling region built out of order");
  if (!pieces_.empty() && s == pieces_.back().hi + 1)
    pieces_.back().hi = s;
  else
    pieces_.push_back({s, s});
}

bool SamplingRegion::contains(int s) const noexcept {
  for (const auto& p : pieces_)
    if (p.contains(s)) return true;
  return false;
}

int SamplingRegion::size() const noexcept {
  int n = 0;
  for (const auto& p : pieces_) n += p.size();
  return n;
}

SamplingInterval SamplingRegion::hull() const noexcept {
  if (pieces_.empty()) return {};
  return {pieces_.front().lo, pieces_.back().hi};
}

LatticeModel LatticeModel::truncated(int n) const {
  if (n > horizon) throw DomainError("model horizon " + std::to_string(horizon) + " < " +
                                     std::to_string(n));
  return {prior, h, n, coverage.truncated(n), predictive.truncated(n)};
}

LatticeModel build_model(const PriorSpec& prior, HalfWidth h, int horizon) {
  return {prior, h, horizon, coverage_grid(prior, h, horizon), predictive_grid(prior, horizon)};
}

PolicyGrid solve_values(const Triangular<double>& comp_coverage,
                        const Triangular<double>& predictive, CostPerSample c, int horizon) {
  if (horizon < 0 || horizon > comp_coverage.horizon() ||
      (horizon > 0 && predictive.horizon() < horizon - 1))
    throw DomainError("solve_values: grids shorter than horizon " + std::to_string(horizon));

  PolicyGrid grid;
  grid.horizon = horizon;
  grid.values = Triangular<double>(horizon);
  grid.continue_values = Triangular<double>(horizon);
  grid.regions.assign(static_cast<std::size_t>(horizon) + 1, SamplingRegion{});

  for (int s = 0; s <= horizon; ++s) grid.values(horizon, s) = comp_coverage(horizon, s);

  const double cost = c.value();
  for (int t = horizon - 1; t >= 0; --t) {
    auto& region = grid.regions[static_cast<std::size_t>(t)];
    for (int s = 0; s <= t; ++s) {
      const double g = predictive(t, s);
      const double cont = g * grid.values(t + 1, s + 1) + (1.0 - g) * grid.values(t + 1, s);
      grid.continue_values(t, s) = cont;
      const double stop_cost = comp_coverage(t, s);
      if (stop_cost <= cost + cont) {
        grid.values(t, s) = stop_cost;
      } else {
        grid.values(t, s) = cost + cont;
        region.push_back(s);
      }
    }
  }
  return grid;
}

StoppingPolicy backward_solve(const LatticeModel& model, CostPerSample c, std::optional<int> horizon) {
  const int n = horizon.value_or(model.horizon);
  if (n < 0 || n > model.horizon)
    throw DomainError("backward_solve: horizon " + std::to_string(n) + " outside model");
  PolicyGrid grid = solve_values(model.coverage.comp_coverage, model.predictive, c, n);
  const auto [t_lo, t_up] = extract_limits(grid);
  return StoppingPolicy{model.prior,
                        model.h,
                        c,
                        n,
                        std::move(grid),
                        model.coverage.estimates.truncated(n),
                        model.coverage.comp_coverage.truncated(n),
                        t_lo,
                        t_up};
}

StoppingPolicy backward_solve(const PriorSpec& prior, HalfWidth h, CostPerSample c, int horizon) {
  return backward_solve(build_model(prior, h, horizon), c);
}

std::pair<int, int> extract_limits(const PolicyGrid& grid) {
  int t_up = grid.horizon;
  for (int t = 0; t <= grid.horizon; ++t) {
    if (grid.regions[static_cast<std::size_t>(t)].empty()) {
      t_up = t;
      break;
    }
  }
  int t_lo = 0;
  while (t_lo <= grid.horizon) {
    if (grid.regions[static_cast<std::size_t>(t_lo)] != SamplingInterval{0, t_lo}) break;
    ++t_lo;
  }
  return {t_lo, t_up};
}

Thresholds thresholds(const PolicyGrid& grid, int t) {
  if (t < 0 || t > grid.horizon) throw OutOfLattice("thresholds: t outside horizon");
  const auto& region = grid.regions[static_cast<std::size_t>(t)];
  if (!region.is_interval()) throw NonIntervalRegion(t);
  const SamplingInterval r = region.hull();
  if (r.empty()) return {Thresholds::Kind::AllStopping, 0, 0};
  if (r.lo == 0 && r.hi == t) return {Thresholds::Kind::AllSampling, -1, t + 1};
  return {Thresholds::Kind::Interval, r.lo - 1, r.hi + 1};
}

Decision decide(const StoppingPolicy& policy, int t, int s) {
  if (t < 0 || t > policy.horizon || s < 0 || s > t)
    throw OutOfLattice("decide: (" + std::to_string(t) + "," + std::to_string(s) +
                       ") outside lattice of horizon " + std::to_string(policy.horizon));
  if (policy.region(t).contains(s)) return {Decision::Kind::Continue};
  const double mid = policy.estimates(t, s);
  const double h = policy.h;
  return {Decision::Kind::Stop, mid, std::max(0.0, mid - h), std::min(1.0, mid + h)};
}

}  // namespace seqci
