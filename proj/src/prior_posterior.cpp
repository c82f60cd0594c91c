#include "seqci/prior_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqci/errors.hpp"

namespace seqci {

namespace {

constexpr int kPanels = 32;
constexpr int kPanelNodes = 64;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const GaussLegendreRule& panel_rule() {
  static const GaussLegendreRule rule = gauss_legendre(kPanelNodes);
  return rule;
}

// s log(theta) with 0 log 0 = 0.
double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(y);
}

double gl_mass(const std::vector<PriorSpec::Node>& nodes) {
  // Integral of the interpolated density over [0,1] under the panel rule.
  const auto& rule = panel_rule();
  double total = 0.0;
  const double width = 1.0 / kPanels;
  std::size_t k = 0;
  for (int panel = 0; panel < kPanels; ++panel) {
    const double a = panel * width;
    for (int i = 0; i < kPanelNodes; ++i) {
      const double theta = a + 0.5 * width * (rule.nodes[i] + 1.0);
      while (k + 2 < nodes.size() && nodes[k + 1].theta <= theta) ++k;
      const auto& n0 = nodes[k];
      const auto& n1 = nodes[k + 1];
      const double w = (theta - n0.theta) / (n1.theta - n0.theta);
      total += 0.5 * width * rule.weights[i] * ((1.0 - w) * n0.density + w * n1.density);
    }
  }
  return total;
}

}  // namespace

struct PriorSpec::Table {
  std::vector<Node> nodes;

  double density(double theta) const {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), theta,
                               [](double x, const Node& n) { return x < n.theta; });
    if (it == nodes.begin()) return nodes.front().density;
    if (it == nodes.end()) return nodes.back().density;
    const Node& hi = *it;
    const Node& lo = *(it - 1);
    const double w = (theta - lo.theta) / (hi.theta - lo.theta);
    return (1.0 - w) * lo.density + w * hi.density;
  }
};

PriorSpec PriorSpec::beta(double p, double q) {
  BetaParams checked(p, q);
  PriorSpec prior;
  prior.p_ = checked.p;
  prior.q_ = checked.q;
  prior.symmetric_ = checked.p == checked.q;
  return prior;
}

PriorSpec PriorSpec::tabulated(std::vector<Node> nodes) {
  if (nodes.size() < 2) throw DomainError("tabulated prior needs at least two nodes");
  if (nodes.front().theta != 0.0 || nodes.back().theta != 1.0)
    throw DomainError("tabulated prior nodes must span [0, 1]");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i].density >= 0.0) || !std::isfinite(nodes[i].density))
      throw DomainError("tabulated prior densities must be finite and nonnegative");
    if (i > 0 && !(nodes[i].theta > nodes[i - 1].theta))
      throw DomainError("tabulated prior nodes must be strictly increasing");
  }
  const double mass = gl_mass(nodes);
  if (std::abs(mass - 1.0) > 1e-8)
    throw DomainError("tabulated prior integrates to " + std::to_string(mass) + ", not 1");

  bool symmetric = true;
  for (std::size_t i = 0, j = nodes.size() - 1; i < j; ++i, --j) {
    if (std::abs(nodes[i].theta + nodes[j].theta - 1.0) > 1e-12 ||
        std::abs(nodes[i].density - nodes[j].density) > 1e-12 * (1.0 + nodes[i].density)) {
      symmetric = false;
      break;
    }
  }

  PriorSpec prior;
  prior.symmetric_ = symmetric;
  prior.table_ = std::make_shared<const Table>(Table{std::move(nodes)});
  return prior;
}

PriorSpec PriorSpec::tabulated_normalized(std::vector<Node> nodes) {
  if (nodes.size() < 2 || nodes.front().theta != 0.0 || nodes.back().theta != 1.0)
    throw DomainError("tabulated prior nodes must span [0, 1]");
  const double mass = gl_mass(nodes);
  if (!(mass > 0.0)) throw DomainError("tabulated prior has zero mass");
  for (auto& n : nodes) n.density /= mass;
  return tabulated(std::move(nodes));
}

BetaParams PriorSpec::beta_params() const {
  if (table_) throw UnsupportedPrior("operation requires a Beta prior");
  return {p_, q_};
}

const std::vector<PriorSpec::Node>& PriorSpec::nodes() const {
  if (!table_) throw UnsupportedPrior("Beta prior has no tabulated nodes");
  return table_->nodes;
}

double PriorSpec::density(double theta) const {
  if (table_) return table_->density(theta);
  return std::exp(log_density(theta));
}

double PriorSpec::log_density(double theta) const {
  if (table_) {
    const double d = table_->density(theta);
    return d > 0.0 ? std::log(d) : kNegInf;
  }
  if (theta < 0.0 || theta > 1.0) return kNegInf;
  const double a = (p_ - 1.0) * (theta == 0.0 && p_ == 1.0 ? 0.0 : std::log(theta));
  const double b = (q_ - 1.0) * (theta == 1.0 && q_ == 1.0 ? 0.0 : std::log1p(-theta));
  return a + b - log_beta(p_, q_);
}

bool operator==(const PriorSpec& a, const PriorSpec& b) {
  if (a.is_beta() != b.is_beta()) return false;
  if (a.is_beta()) return a.p_ == b.p_ && a.q_ == b.q_;
  return a.table_->nodes == b.table_->nodes;
}

PosteriorState::PosteriorState(int t, int s, PriorSpec prior)
    : t_(t), s_(s), prior_(std::move(prior)) {
  if (t < 0 || s < 0 || s > t)
    throw DomainError("posterior state requires 0 <= s <= t (t=" + std::to_string(t) +
                      ", s=" + std::to_string(s) + ")");
}

double log_posterior_integral(const PriorSpec& prior, int t, int s, double lo, double hi) {
  if (!(hi > lo)) return kNegInf;
  const auto& rule = panel_rule();
  const double width = (hi - lo) / kPanels;
  const double ds = s;
  const double df = t - s;
  double acc = kNegInf;
  for (int panel = 0; panel < kPanels; ++panel) {
    const double a = lo + panel * width;
    for (int i = 0; i < kPanelNodes; ++i) {
      const double theta = a + 0.5 * width * (rule.nodes[i] + 1.0);
      const double ld = prior.log_density(theta);
      if (ld == kNegInf) continue;
      const double term = xlogy(ds, theta) + (df == 0.0 ? 0.0 : df * std::log1p(-theta)) + ld +
                          std::log(0.5 * width * rule.weights[i]);
      acc = log_add(acc, term);
    }
  }
  return acc;
}

BetaParams posterior_params(const PosteriorState& state) {
  const BetaParams prior = state.prior().beta_params();
  return {prior.p + state.s(), prior.q + (state.t() - state.s())};
}

namespace {

double log_normalizer(const PosteriorState& state) {
  const double z = log_posterior_integral(state.prior(), state.t(), state.s(), 0.0, 1.0);
  if (!std::isfinite(z))
    throw QuadratureFailure("posterior normalizer vanished at (t=" + std::to_string(state.t()) +
                            ", s=" + std::to_string(state.s()) + ")");
  return z;
}

}  // namespace

double posterior_cdf(const PosteriorState& state, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("posterior_cdf: x outside [0,1]");
  if (state.prior().is_beta()) return reg_inc_beta(x, posterior_params(state));
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double z = log_normalizer(state);
  const double lower = log_posterior_integral(state.prior(), state.t(), state.s(), 0.0, x);
  return std::clamp(std::exp(lower - z), 0.0, 1.0);
}

double posterior_tail_mass(const PosteriorState& state, double lo, double hi) {
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  if (lo > hi) throw DomainError("posterior_tail_mass: lo > hi");
  if (state.prior().is_beta()) {
    const BetaParams post = posterior_params(state);
    return std::min(1.0, reg_inc_beta(lo, post) + reg_inc_beta_upper(hi, post));
  }
  const double z = log_normalizer(state);
  const double left = log_posterior_integral(state.prior(), state.t(), state.s(), 0.0, lo);
  const double right = log_posterior_integral(state.prior(), state.t(), state.s(), hi, 1.0);
  return std::clamp(std::exp(log_add(left, right) - z), 0.0, 1.0);
}

double predictive_success(const PosteriorState& state) {
  if (state.prior().is_beta()) {
    const BetaParams prior = state.prior().beta_params();
    return (state.s() + prior.p) / (state.t() + prior.p + prior.q);
  }
  // Ratio of integrals with one extra success in the numerator.
  const double z = log_normalizer(state);
  const double num =
      log_posterior_integral(state.prior(), state.t() + 1, state.s() + 1, 0.0, 1.0);
  return std::clamp(std::exp(num - z), 0.0, 1.0);
}

Triangular<double> predictive_grid(const PriorSpec& prior, int horizon) {
  Triangular<double> g(horizon);
  for (int t = 0; t <= horizon; ++t)
    for (int s = 0; s <= t; ++s) g(t, s) = predictive_success(PosteriorState(t, s, prior));
  return g;
}

}  // namespace seqci
