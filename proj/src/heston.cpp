#include "debias/heston.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "debias/errors.hpp"

namespace debias::heston {

void HestonParams::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw InvalidArgument(std::string("Heston parameter ") + name + " must be positive");
  };
  positive(s0, "s0");
  positive(strike, "strike");
  positive(maturity, "maturity");
  positive(kappa, "kappa");
  positive(theta, "theta");
  positive(sigma_v, "sigma_v");
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw InvalidArgument("Heston parameter v0 must be >= 0");
  if (!(std::abs(rho) <= 1.0)) throw InvalidArgument("Heston parameter rho must lie in [-1, 1]");
  if (!std::isfinite(rate)) throw InvalidArgument("Heston parameter rate must be finite");
}

HestonParams broadie_kaya_1() {
  return {.s0 = 100.0,
          .strike = 100.0,
          .rate = 0.05,
          .maturity = 5.0,
          .rho = -0.3,
          .kappa = 2.0,
          .theta = 0.09,
          .sigma_v = 1.0,
          .v0 = 0.09};
}

HestonParams broadie_kaya_2() {
  return {.s0 = 100.0,
          .strike = 100.0,
          .rate = 0.0319,
          .maturity = 1.0,
          .rho = -0.7,
          .kappa = 6.21,
          .theta = 0.019,
          .sigma_v = 0.61,
          .v0 = 0.010201};
}

HestonParams preset(std::string_view name) {
  if (name == "broadie_kaya_1") return broadie_kaya_1();
  if (name == "broadie_kaya_2") return broadie_kaya_2();
  throw InvalidArgument("unknown Heston preset '" + std::string(name) + "'");
}

double norm_cdf(double x) {
  if (x > 8.0) return 1.0;
  if (x < -8.0) return 0.0;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double bs_call(double spot, double strike, double rate, double maturity, double sigma) {
  if (!std::isfinite(spot) || !std::isfinite(strike) || !std::isfinite(rate) ||
      !std::isfinite(maturity) || !std::isfinite(sigma))
    throw InvalidArgument("bs_call: non-finite input");
  if (!(spot > 0.0) || !(strike > 0.0) || maturity < 0.0 || sigma < 0.0)
    throw InvalidArgument("bs_call: need S > 0, K > 0, T >= 0, sigma >= 0");

  const double discounted_strike = strike * std::exp(-rate * maturity);
  if (sigma == 0.0 || maturity == 0.0) return std::max(spot - discounted_strike, 0.0);

  const double sd = sigma * std::sqrt(maturity);
  const double d1 = std::log(spot / discounted_strike) / sd + 0.5 * sd;
  const double d2 = d1 - sd;
  return spot * norm_cdf(d1) - discounted_strike * norm_cdf(d2);
}

double cir_exact_step(double v, double dt, double kappa, double theta, double sigma_v,
                      Stream& stream) {
  const double decay = std::exp(-kappa * dt);
  const double scale = sigma_v * sigma_v * -std::expm1(-kappa * dt) / (4.0 * kappa);
  const double dof = 4.0 * kappa * theta / (sigma_v * sigma_v);
  const double noncentrality = v * decay / scale;

  // chi'^2(d, lambda) = chi^2(d + 2J), J ~ Poisson(lambda / 2)
  long j = 0;
  if (noncentrality > 0.0) j = std::poisson_distribution<long>(0.5 * noncentrality)(stream);
  const double shape = 0.5 * dof + static_cast<double>(j);
  const double chi2 = 2.0 * std::gamma_distribution<double>(shape, 1.0)(stream);
  return scale * chi2;
}

VariancePath simulate_variance_grid(const HestonParams& p, int level, Stream& stream) {
  if (level < 0) throw InvalidLevel("level must be >= 0");
  const long steps = 1L << level;
  const double dt = p.maturity / static_cast<double>(steps);
  VariancePath path{level, p.maturity, {}};
  path.values.reserve(static_cast<std::size_t>(steps) + 1);
  path.values.push_back(p.v0);
  for (long k = 0; k < steps; ++k)
    path.values.push_back(cir_exact_step(path.values.back(), dt, p.kappa, p.theta, p.sigma_v, stream));
  return path;
}

std::vector<double> nested_trapezoid_integrals(const VariancePath& path, int first) {
  if (first < 0 || first > path.level)
    throw InvalidArgument("nested integrals need 0 <= first <= path level");
  const auto& v = path.values;
  const double ends = 0.5 * (v.front() + v.back());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(path.level - first + 1));
  for (int j = first; j <= path.level; ++j) {
    const std::size_t stride = std::size_t{1} << (path.level - j);
    const long intervals = 1L << j;
    double interior = 0.0;
    for (long m = 1; m < intervals; ++m) interior += v[static_cast<std::size_t>(m) * stride];
    out.push_back(path.horizon / static_cast<double>(intervals) * (ends + interior));
  }
  return out;
}

double log_xi_factor(double v_terminal, double integrated, const HestonParams& p) {
  return -0.5 * p.rho * p.rho * integrated +
         p.rho / p.sigma_v *
             (v_terminal - p.v0 + p.kappa * integrated - p.kappa * p.theta * p.maturity);
}

double xi_factor(double v_terminal, double integrated, const HestonParams& p) {
  if (integrated < 0.0) throw InvalidArgument("integrated variance must be >= 0");
  const double value = std::exp(log_xi_factor(v_terminal, integrated, p));
  if (!std::isfinite(value) || value <= 0.0)
    throw InvalidState("xi factor is not representable (log xi = " +
                       std::to_string(log_xi_factor(v_terminal, integrated, p)) + ")");
  return value;
}

double conditional_price(double v_terminal, double integrated, const HestonParams& p) {
  if (!(p.maturity > 0.0)) throw InvalidArgument("conditional price needs T > 0");
  const double xi = xi_factor(v_terminal, integrated, p);
  const double sigma = std::sqrt(integrated / p.maturity) * std::sqrt(1.0 - p.rho * p.rho);
  return bs_call(p.s0 * xi, p.strike, p.rate, p.maturity, sigma);
}

HestonLevelModel::HestonLevelModel(HestonParams params) : params_(params) {
  params_.validate();
}

std::vector<double> HestonLevelModel::levels(Stream& stream, int first, int last) const {
  if (first < 0 || last < first) throw InvalidLevel("invalid level range");
  const auto path = simulate_variance_grid(params_, last, stream);
  const auto integrals = nested_trapezoid_integrals(path, first);
  std::vector<double> out;
  out.reserve(integrals.size());
  for (std::size_t i = 0; i < integrals.size(); ++i) {
    try {
      out.push_back(conditional_price(path.values.back(), integrals[i], params_));
    } catch (const Error& e) {
      throw LevelFailure(first + static_cast<int>(i), e.what());
    }
  }
  return out;
}

std::shared_ptr<const HestonLevelModel> heston_level_model(const HestonParams& params) {
  return std::make_shared<const HestonLevelModel>(params);
}

}  // namespace debias::heston
