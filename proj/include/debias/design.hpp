#pragma once

#include <vector>

namespace debias::design {

/// Level means and variances mu_0..mu_L, sigma^2_0..sigma^2_L and the limit mean.
struct MomentSequence {
  std::vector<double> mean;
  std::vector<double> variance;
  double limit = 0.0;

  /// InvalidArgument unless lengths agree, there are >= 2 levels and variances are >= 0.
  void validate() const;
  /// (mu_n + mu_{n-1}) / 2 for n >= 1.
  double midpoint(int n) const;
};

struct SurvivalProfile {
  std::vector<double> survival;  // Q_1 .. Q_L
  double scale = 0.0;            // c in Q_n = c * weight_n, before clamping
  double achieved_budget = 0.0;  // sum of the final Q_n
};

/// Q_n proportional to sqrt|2(x_inf - xi_n) d mu_n - d sigma^2_n|, scaled so that
/// sum Q_n = budget, then clamped to 1 and made non-increasing by a running minimum.
/// The budget is not re-solved after clamping; achieved_budget reports the result.
SurvivalProfile optimal_survival_profile(const MomentSequence& moments, double budget);

/// a^2 r^{2s} (1-q)/(q-r^2): variance of the debiased toy sequence b + a r^n under
/// survival Q_n = q^{n-s}. InfeasibleLaw unless r^2 < q < 1.
double toy_variance(double a, double r, double s, double q);

struct GeometricDesign {
  double q = 0.0;             // |r|
  double s = 0.0;             // real-valued shift mu_N - |r|/(1-|r|)
  double min_variance = 0.0;  // a^2 |r|^{2s-1}
  double inflation = 0.0;     // mse_inflation_factor(r)
  // Integer shift: both neighbours of s with q re-solved from s + q/(1-q) = mu_N,
  // keeping the smaller toy variance.
  int s_rounded = 0;
  double q_rounded = 0.0;
  double rounded_variance = 0.0;
};

/// Variance-optimal shifted geometric law for the toy sequence at expected level mu_N.
/// InvalidArgument unless 0 < |r| < 1; InfeasibleBudget when the shift would be negative.
GeometricDesign optimal_geometric_design(double r, double mean_level, double a = 1.0);

/// |r|^{-2|r|/(1-|r|)}.
double mse_inflation_factor(double r);

struct CostDesign {
  int s = 0;
  double q = 0.0;
  double objective = 0.0;  // r^{2s} c / (c - 2^s - r^2 (2c - 2^s))
};

/// Every integer s with 2^s < c whose budget-implied q = (c - 2^s)/(2c - 2^s)
/// satisfies r^2 < q < 1/2.
std::vector<CostDesign> cost_design_candidates(double r, double budget);

/// Minimizer over cost_design_candidates. InfeasibleBudget when there is none.
CostDesign cost_constrained_design(double r, double budget);

}  // namespace debias::design
