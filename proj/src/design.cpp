#include "debias/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "debias/errors.hpp"

namespace debias::design {

namespace {

double checked_ratio(double r) {
  const double magnitude = std::abs(r);
  if (!(magnitude > 0.0 && magnitude < 1.0))
    throw InvalidArgument("ratio r must satisfy 0 < |r| < 1, got " + std::to_string(r));
  return magnitude;
}

}  // namespace

void MomentSequence::validate() const {
  if (mean.size() != variance.size())
    throw InvalidArgument("moment sequence: mean and variance lengths differ");
  if (mean.size() < 2) throw InvalidArgument("moment sequence needs at least 2 levels");
  for (double v : variance)
    if (!(v >= 0.0)) throw InvalidArgument("moment sequence: negative variance");
}

double MomentSequence::midpoint(int n) const {
  const auto k = static_cast<std::size_t>(n);
  return 0.5 * (mean[k] + mean[k - 1]);
}

SurvivalProfile optimal_survival_profile(const MomentSequence& moments, double budget) {
  moments.validate();
  if (!(budget > 0.0)) throw InvalidArgument("budget must be > 0");

  const int levels = static_cast<int>(moments.mean.size()) - 1;
  std::vector<double> weight(static_cast<std::size_t>(levels));
  double total = 0.0;
  for (int n = 1; n <= levels; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const double d_mean = moments.mean[k] - moments.mean[k - 1];
    const double d_var = moments.variance[k] - moments.variance[k - 1];
    const double w =
        std::sqrt(std::abs(2.0 * (moments.limit - moments.midpoint(n)) * d_mean - d_var));
    weight[k - 1] = w;
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateDesign("all design weights are zero (constant sequence)");

  SurvivalProfile profile;
  profile.scale = budget / total;
  profile.survival.reserve(weight.size());
  double running = 1.0;
  for (double w : weight) {
    running = std::min(running, profile.scale * w);
    profile.survival.push_back(running);
    profile.achieved_budget += running;
  }
  return profile;
}

double toy_variance(double a, double r, double s, double q) {
  const double r2 = r * r;
  if (!(q > r2 && q < 1.0))
    throw InfeasibleLaw("toy variance needs r^2 < q < 1 (r^2 = " + std::to_string(r2) +
                        ", q = " + std::to_string(q) + ")");
  if (s < 0.0) throw InvalidArgument("shift must be >= 0");
  return a * a * std::pow(r2, s) * (1.0 - q) / (q - r2);
}

double mse_inflation_factor(double r) {
  const double m = checked_ratio(r);
  return std::pow(m, -2.0 * m / (1.0 - m));
}

GeometricDesign optimal_geometric_design(double r, double mean_level, double a) {
  const double m = checked_ratio(r);
  GeometricDesign d;
  d.q = m;
  d.s = mean_level - m / (1.0 - m);
  if (d.s < 0.0)
    throw InfeasibleBudget("expected level " + std::to_string(mean_level) +
                           " is below |r|/(1-|r|); the shift would be negative");
  d.min_variance = a * a * std::pow(m, 2.0 * d.s - 1.0);
  d.inflation = mse_inflation_factor(r);

  bool found = false;
  for (double candidate : {std::floor(d.s), std::ceil(d.s)}) {
    const double slack = mean_level - candidate;
    if (slack <= 0.0) continue;
    const double q = slack / (1.0 + slack);
    if (!(q > r * r)) continue;
    const double variance = toy_variance(a, r, candidate, q);
    if (!found || variance < d.rounded_variance) {
      found = true;
      d.s_rounded = static_cast<int>(candidate);
      d.q_rounded = q;
      d.rounded_variance = variance;
    }
  }
  // floor(s) leaves slack >= |r|/(1-|r|), so q >= |r| > r^2 and a candidate always exists.
  return d;
}

std::vector<CostDesign> cost_design_candidates(double r, double budget) {
  const double m = checked_ratio(r);
  if (!(budget > 1.0)) throw InvalidArgument("evaluation budget c must exceed 1");
  const double r2 = m * m;
  std::vector<CostDesign> out;
  for (int s = 0; std::ldexp(1.0, s) < budget; ++s) {
    const double base = std::ldexp(1.0, s);
    const double q = (budget - base) / (2.0 * budget - base);
    if (!(q > r2 && q < 0.5)) continue;
    const double objective =
        std::pow(r2, s) * budget / (budget - base - r2 * (2.0 * budget - base));
    out.push_back({s, q, objective});
  }
  return out;
}

CostDesign cost_constrained_design(double r, double budget) {
  const auto candidates = cost_design_candidates(r, budget);
  if (candidates.empty())
    throw InfeasibleBudget("no shift s with 2^s < c admits r^2 < q < 1/2");
  return *std::min_element(candidates.begin(), candidates.end(),
                           [](const CostDesign& x, const CostDesign& y) {
                             return x.objective < y.objective;
                           });
}

}  // namespace debias::design
