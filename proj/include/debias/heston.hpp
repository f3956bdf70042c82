#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "debias/level_model.hpp"
#include "debias/random.hpp"

namespace debias::heston {

struct HestonParams {
  double s0;
  double strike;
  double rate;
  double maturity;
  double rho;
  double kappa;    // mean-reversion speed
  double theta;    // long-run variance
  double sigma_v;  // volatility of variance
  double v0;

  /// Throws InvalidArgument unless every positivity constraint and |rho| <= 1 hold.
  void validate() const;
  /// 2 kappa theta > sigma_v^2. Informational; both presets violate it.
  bool feller_ok() const noexcept { return 2.0 * kappa * theta > sigma_v * sigma_v; }
};

HestonParams broadie_kaya_1();
HestonParams broadie_kaya_2();
/// InvalidArgument for unknown names.
HestonParams preset(std::string_view name);

/// Exactly simulated variance on the uniform grid k T / 2^level, k = 0..2^level.
struct VariancePath {
  int level = 0;
  double horizon = 0.0;
  std::vector<double> values;
};

/// Standard normal CDF, clamped to {0, 1} beyond |x| > 8.
double norm_cdf(double x);

/// Black-Scholes call with zero dividend yield. sigma == 0 or T == 0 gives the
/// discounted intrinsic value max(S - K e^{-rT}, 0).
double bs_call(double spot, double strike, double rate, double maturity, double sigma);

/// Draws V_{t+dt} | V_t = v exactly as a scaled noncentral chi-square, using the
/// Poisson mixture of central chi-squares (valid for every degrees-of-freedom value).
double cir_exact_step(double v, double dt, double kappa, double theta, double sigma_v,
                      Stream& stream);

VariancePath simulate_variance_grid(const HestonParams& p, int level, Stream& stream);

/// Trapezoid integrals I_first..I_N of the path, level j using every 2^{N-j}-th point.
std::vector<double> nested_trapezoid_integrals(const VariancePath& path, int first);

/// log of xi = exp(-(rho^2/2) I + (rho/sigma_v)(v_T - v0 + kappa I - kappa theta T)).
double log_xi_factor(double v_terminal, double integrated, const HestonParams& p);
double xi_factor(double v_terminal, double integrated, const HestonParams& p);

/// BS(s0 xi, K, r, T, sqrt(I/T) sqrt(1 - rho^2)): the call price conditional on
/// (V_T, I(T)).
double conditional_price(double v_terminal, double integrated, const HestonParams& p);

/// Level n value: conditional_price(V_T, I_n). One path is simulated at the
/// finest requested level; coarser integrals come from its sub-grids.
class HestonLevelModel final : public LevelSequenceModel {
 public:
  explicit HestonLevelModel(HestonParams params);

  const HestonParams& params() const noexcept { return params_; }

  CostModel cost_model() const override { return CostModel::Exponential; }
  std::vector<double> levels(Stream& stream, int first, int last) const override;

 private:
  HestonParams params_;
};

std::shared_ptr<const HestonLevelModel> heston_level_model(const HestonParams& params);

}  // namespace debias::heston
