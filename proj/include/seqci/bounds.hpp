#pragma once

// Closed-form bounds for the symmetric Beta(a, a) prior. All logarithms are
// natural; |log c| means |ln c|.

namespace seqci::bounds {

/// a = n_a + delta_a with delta_a in (0, 1]; an integer a gives delta_a = 1.
struct BetaFractionalParts {
  int n_a;
  double delta_a;
};
BetaFractionalParts fractional_parts(double a);

/// 2 exp(-2 h^2 (t + 2a + 1)): upper bound on C_t(s) for every s.
double chernoff_upper(int t, double a, double h);

/// 2 (1/4 - h^2)^delta (1/2 - h)^(t + 2 n_a) / ((t + 2 n_a + 2 delta) Gamma(delta)):
/// lower bound on C_t(s) for every s, t >= 1.
double incbeta_lower(int t, double a, double h);

struct SigmaBound {
  double exact_max;  // max_s posterior variance at time t
  double envelope;   // 1 / (4 (t + p + q + 1))
};
SigmaBound chebyshev_sigma_bound(int t, double p, double q);

/// ceil(max{0, 1/(4 h^2 c) - 2a - 1}).
long long crude_horizon_bound(double c, double a, double h);

/// ceil(max{0, (|ln c| + ln 2)/(2 h^2) - 2a - 1}): horizon past which every
/// cell stops.
int log_horizon(double c, double a, double h);

/// floor(max{0, (|ln c| - ln((N + 2n_a + delta)^2 Gamma(delta)) + ln(8 (1/4-h^2)^delta))
///             / |ln(1/2 - h)| - 2 n_a}).
/// Only meaningful when c <= C_0 / (N + 1); see lower_limit_valid().
int log_lower_limit(double c, double a, double h, int horizon);

/// The condition c (N + 1) <= C_0 under which log_lower_limit bounds t_lo.
bool lower_limit_valid(double c, int horizon, double c0);

/// 1 / (4 h^2 t): Chebyshev bound on the fixed-t Bayes miss probability.
double bayes_risk_bound(int t, double h);

/// Smallest t with bayes_risk_bound(t, h) < alpha.
int chebyshev_horizon(double alpha, double h);

}  // namespace seqci::bounds
