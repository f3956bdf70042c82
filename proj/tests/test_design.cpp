#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "debias/design.hpp"
#include "debias/errors.hpp"
#include "oracles.hpp"

using namespace debias;
using namespace debias::design;
using Catch::Approx;

namespace {

MomentSequence toy_moments(double b, double a, double r, int levels) {
  MomentSequence m;
  for (int n = 0; n <= levels; ++n) {
    m.mean.push_back(b + a * std::pow(r, n));
    m.variance.push_back(0.0);
  }
  m.limit = b;
  return m;
}

}  // namespace

TEST_CASE("survival profile for a deterministic geometric sequence", "[design][profile]") {
  for (double r : {0.5, -0.6, 0.3}) {
    const auto m = toy_moments(1.0, 2.0, r, 12);
    const auto profile = optimal_survival_profile(m, 1.0);
    REQUIRE(profile.survival.size() == 12);
    CHECK(profile.achieved_budget == Approx(1.0));
    for (std::size_t n = 1; n < profile.survival.size(); ++n)
      CHECK(profile.survival[n] / profile.survival[n - 1] == Approx(std::abs(r)).epsilon(1e-9));
  }
}

TEST_CASE("survival profile weights follow the zero-variance reduction", "[design][profile]") {
  MomentSequence m;
  m.mean = {3.0, 2.5, 2.2, 2.1, 2.04, 2.02, 2.005};
  m.variance = std::vector<double>(m.mean.size(), 0.0);
  m.limit = 2.0;
  const auto profile = optimal_survival_profile(m, 0.5);
  std::vector<double> weights;
  double total = 0.0;
  for (std::size_t n = 1; n < m.mean.size(); ++n) {
    const double d = m.mean[n] - m.mean[n - 1];
    weights.push_back(std::sqrt(std::abs(d * (2.0 * m.limit - m.mean[n] - m.mean[n - 1]))));
    total += weights.back();
  }
  // The weights here are already non-increasing, so no clamping happens.
  for (std::size_t i = 0; i < weights.size(); ++i)
    CHECK(profile.survival[i] == Approx(0.5 * weights[i] / total).epsilon(1e-12));
  CHECK(profile.scale == Approx(0.5 / total));
}

TEST_CASE("survival profile is clamped and monotone", "[design][profile]") {
  MomentSequence m;
  m.mean = {0.0, 0.1, 1.0, 1.05, 1.5, 1.51, 1.6};
  m.variance = {0.0, 0.5, 0.2, 0.3, 0.0, 0.1, 0.05};
  m.limit = 1.6;
  const auto profile = optimal_survival_profile(m, 4.0);
  double previous = 1.0, total = 0.0;
  for (double q : profile.survival) {
    CHECK(q <= previous);
    CHECK(q <= 1.0);
    previous = q;
    total += q;
  }
  CHECK(profile.achieved_budget == Approx(total));
}

TEST_CASE("survival profile errors", "[design][profile]") {
  auto constant = toy_moments(1.0, 0.0, 0.5, 5);
  CHECK_THROWS_AS(optimal_survival_profile(constant, 2.0), DegenerateDesign);
  auto bad = toy_moments(1.0, 1.0, 0.5, 5);
  bad.variance.pop_back();
  CHECK_THROWS_AS(optimal_survival_profile(bad, 2.0), InvalidArgument);
}

TEST_CASE("toy variance hand values and errors", "[design][toy]") {
  CHECK(toy_variance(1.0, 0.5, 0, 0.5) == Approx(2.0));
  CHECK(toy_variance(1.0, 0.5, 2, 0.5) == Approx(0.125));
  CHECK(toy_variance(1.0, 0.5, 2, 0.5) == Approx(std::pow(0.5, 3)));
  CHECK_THROWS_AS(toy_variance(1.0, 0.5, 0, 0.25), InfeasibleLaw);
  CHECK_THROWS_AS(toy_variance(1.0, 0.5, 0, 0.2), InfeasibleLaw);
  CHECK_THROWS_AS(toy_variance(1.0, 0.5, 0, 1.0), InfeasibleLaw);
  CHECK(toy_variance(1.0, 0.5, 0, 0.25 + 1e-9) > 1e8);
}

TEST_CASE("toy variance agrees with enumeration over N", "[design][toy][property]") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 0.2 + 3.0 * u(gen);
    const double r = (u(gen) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.8 * u(gen));
    const int s = static_cast<int>(6 * u(gen));
    // q >= |r| keeps the variance tail no heavier than the probability tail.
    const double q = std::abs(r) + (0.95 - std::abs(r)) * (0.05 + 0.9 * u(gen));
    const auto brute = oracle::enumerate_debiased(
        [&](int n) { return 1.0 + a * std::pow(r, n); },
        [&](int n) { return n <= s ? 1.0 : std::pow(q, n - s); }, s);
    INFO("a " << a << " r " << r << " s " << s << " q " << q);
    REQUIRE(brute.mean == Approx(1.0).epsilon(1e-9));
    REQUIRE(toy_variance(a, r, s, q) == Approx(brute.variance).epsilon(1e-9));
  }
}

TEST_CASE("geometric design hand values", "[design][geometric]") {
  const auto d = optimal_geometric_design(0.5, 3.0, 1.0);
  CHECK(d.q == 0.5);
  CHECK(d.s == Approx(2.0));
  CHECK(d.min_variance == Approx(0.125));
  CHECK(d.s_rounded == 2);
  CHECK(d.q_rounded == Approx(0.5));
  CHECK(d.rounded_variance == Approx(0.125));
  CHECK(d.inflation == Approx(4.0));

  CHECK_THROWS_AS(optimal_geometric_design(0.5, 0.5, 1.0), InfeasibleBudget);
  CHECK_THROWS_AS(optimal_geometric_design(1.0, 5.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(optimal_geometric_design(0.0, 5.0, 1.0), InvalidArgument);

  const auto tiny = optimal_geometric_design(1e-4, 6.0, 1.0);
  CHECK(tiny.s == Approx(6.0).epsilon(1e-3));
  CHECK(tiny.min_variance < 1e-40);
}

TEST_CASE("closed-form variance equals toy variance at the design point", "[design][geometric]") {
  for (double r : {0.1, -0.3, 0.45, 0.8}) {
    const auto d = optimal_geometric_design(r, 9.0, 1.7);
    CHECK(toy_variance(1.7, r, d.s, d.q) == Approx(d.min_variance).epsilon(1e-12));
    CHECK(d.s + d.q / (1.0 - d.q) == Approx(9.0));
    CHECK(d.s_rounded + d.q_rounded / (1.0 - d.q_rounded) == Approx(9.0));
    CHECK(toy_variance(1.7, r, d.s_rounded, d.q_rounded) == Approx(d.rounded_variance));
  }
}

TEST_CASE("rounded geometric design is not beaten by a feasible grid", "[design][geometric]") {
  for (double r : {0.1, 0.25, -0.4, 0.5, 0.7, 0.9}) {
    for (double mu : {2.5, 4.0, 6.0, 11.3, 19.0}) {
      const double a = 1.0;
      GeometricDesign d;
      try {
        d = optimal_geometric_design(r, mu, a);
      } catch (const InfeasibleBudget&) {
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int s = 0; s < 20; ++s)
        for (int k = 1; k <= 200; ++k) {
          const double q = r * r + (1.0 - r * r) * k / 201.0;
          if (s + q / (1.0 - q) > mu) continue;
          best = std::min(best, toy_variance(a, r, s, q));
        }
      INFO("r " << r << " mu " << mu);
      CHECK(best >= d.rounded_variance * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("MSE inflation factor", "[design][inflation]") {
  CHECK(mse_inflation_factor(0.4) == Approx(3.39).epsilon(2e-3));
  CHECK(mse_inflation_factor(0.5) == Approx(4.0).epsilon(1e-14));
  CHECK(mse_inflation_factor(-0.5) == Approx(4.0).epsilon(1e-14));
  CHECK(mse_inflation_factor(1e-9) == Approx(1.0).epsilon(1e-6));
  CHECK(mse_inflation_factor(0.999999) == Approx(std::exp(2.0)).epsilon(1e-4));
  CHECK_THROWS_AS(mse_inflation_factor(0.0), InvalidArgument);
  CHECK_THROWS_AS(mse_inflation_factor(1.0), InvalidArgument);

  // Optimized variance over deterministic truncation at the same expected level:
  // a^2 |r|^{2s-1} / (a^2 |r|^{2 mu}) carries an extra 1/|r| beyond the factor.
  for (double r : {0.1, 0.3, -0.55, 0.85}) {
    const double mu = 30.0, a = 2.0;
    const auto d = optimal_geometric_design(r, mu, a);
    const double ratio = d.min_variance / (a * a * std::pow(std::abs(r), 2.0 * mu));
    CHECK(ratio * std::abs(r) == Approx(mse_inflation_factor(r)).epsilon(1e-9));
  }
}

TEST_CASE("cost-constrained design examples", "[design][cost]") {
  const auto d = cost_constrained_design(0.25, 20.0);
  CHECK(d.s == 4);
  CHECK(d.q == Approx(1.0 / 6.0));
  CHECK(d.objective == Approx(1.2207e-4).epsilon(1e-3));
  const auto candidates = cost_design_candidates(0.25, 20.0);
  bool saw_three = false;
  for (const auto& c : candidates)
    if (c.s == 3) {
      saw_three = true;
      CHECK(c.objective == Approx(4.8828e-4).epsilon(1e-3));
    }
  CHECK(saw_three);
  CHECK_THROWS_AS(cost_constrained_design(0.9, 2.0), InfeasibleBudget);
  CHECK_THROWS_AS(cost_constrained_design(0.9, 1.0), InvalidArgument);
}

TEST_CASE("cost-constrained objective is the reparameterized toy variance", "[design][cost]") {
  for (double r : {0.1, 0.2, 0.35, 0.5, 0.65}) {
    for (double c : {5.0, 17.0, 100.0, 259.0, 1234.5, 10000.0}) {
      const auto candidates = cost_design_candidates(r, c);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cand : candidates) {
        const double two_s = std::ldexp(1.0, cand.s);
        REQUIRE(two_s < c);
        REQUIRE(cand.q == Approx((c - two_s) / (2.0 * c - two_s)));
        REQUIRE(cand.q > r * r);
        REQUIRE(cand.q < 0.5);
        // Expected 2^N under the law equals the budget.
        REQUIRE(two_s * (1.0 - cand.q) / (1.0 - 2.0 * cand.q) == Approx(c));
        REQUIRE(cand.objective == Approx(toy_variance(1.0, r, cand.s, cand.q)).epsilon(1e-12));
        best = std::min(best, cand.objective);
      }
      if (candidates.empty()) {
        CHECK_THROWS_AS(cost_constrained_design(r, c), InfeasibleBudget);
      } else {
        CHECK(cost_constrained_design(r, c).objective == best);
      }
    }
  }
}
