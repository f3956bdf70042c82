#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "debias/errors.hpp"
#include "debias/estimator.hpp"
#include "debias/sequences.hpp"
#include "oracles.hpp"

using namespace debias;
using Catch::Approx;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("toy levels", "[toy]") {
  const ToyGeometricModel toy(1.0, 1.0, 0.5);
  CHECK(toy_level(toy, 0) == 2.0);
  CHECK(toy_level(toy, 60) == Approx(1.0).epsilon(1e-15));
  CHECK(toy_level(ToyGeometricModel(2.0, 3.0, -0.4), 2) == Approx(2.48).epsilon(1e-15));
  CHECK_THROWS_AS(ToyGeometricModel(1.0, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(toy_level(toy, -1), InvalidLevel);

  Stream stream(1);
  const auto values = toy.levels(stream, 2, 5);
  REQUIRE(values.size() == 4);
  for (int n = 2; n <= 5; ++n) CHECK(values[n - 2] == toy_level(toy, n));
}

TEST_CASE("Newton step hand values", "[newton]") {
  const auto& cubic = find_root_problem("cubic_root");
  const NewtonModel newton(cubic.h, cubic.dh, 1.0, -2.0, 3.0);
  CHECK(newton.step(1.0, 1) == 1.0);
  CHECK(newton.step(2.0, 1) == Approx(17.0 / 12.0).epsilon(1e-15));
  CHECK(newton.step(0.1, 1) == Approx(1.1).epsilon(1e-15));
  CHECK(newton.step(-5.0, 1) == -4.0);
  try {
    newton.step(0.0, 7);
    FAIL("expected failure at a zero derivative");
  } catch (const LevelFailure& e) {
    CHECK(e.level() == 7);
  }
}

TEST_CASE("Newton trajectories: start range, clamp, convergence", "[newton][property]") {
  const auto& cubic = find_root_problem("cubic_root");
  const NewtonModel newton(cubic.h, cubic.dh, 1.0, -2.0, 3.0);
  long failures = 0;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    auto stream = replicate_stream(4, i);
    std::vector<double> x;
    try {
      x = newton_levels(newton, 60, stream);
    } catch (const LevelFailure&) {
      ++failures;
      continue;
    }
    REQUIRE(x.size() == 61);
    REQUIRE(x[0] >= -2.0);
    REQUIRE(x[0] <= 3.0);
    for (std::size_t n = 1; n < x.size(); ++n) REQUIRE(std::abs(x[n] - x[n - 1]) <= 1.0);
    REQUIRE(x.back() == Approx(1.0).epsilon(1e-12));
  }
  CHECK(failures == 0);

  // Levels from a walker match the batch path on the same stream.
  auto a = replicate_stream(4, 9);
  auto b = replicate_stream(4, 9);
  const auto batch = newton_levels(newton, 10, a);
  auto walker = newton.walk(b, 0);
  CHECK(walker->value() == batch[0]);
  for (int n = 1; n <= 10; ++n) CHECK(walker->advance() == batch[n]);
}

TEST_CASE("quadrature hand values", "[quad]") {
  const auto& sine = find_integrand("sin_pi_x");
  const QuadratureModel trap(sine.f, 0.0, 1.0, QuadratureRule::Trapezoid);
  const QuadratureModel simp(sine.f, 0.0, 1.0, QuadratureRule::Simpson);
  CHECK(quadrature_level(trap, 1) == Approx(0.5).epsilon(1e-15));
  CHECK(quadrature_level(simp, 2) == Approx(0.638071).epsilon(1e-6));
  CHECK(quadrature_level(simp, 2) ==
        Approx((4.0 * std::sin(kPi / 4) * 2.0 + 2.0) / 12.0).epsilon(1e-14));
  CHECK_THROWS_AS(quadrature_level(simp, 0), InvalidLevel);
  CHECK(quadrature_level(trap, 0) == Approx(0.0).margin(1e-15));
}

TEST_CASE("nested refinement matches direct composite rules", "[quad][property]") {
  std::mt19937_64 gen(2718);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
    const double lo = u(gen), hi = lo + 0.5 + std::abs(u(gen));
    long calls = 0;
    const RealFunction f = [&](double x) {
      ++calls;
      return a * std::sin(b * x + c) + d * x * x + std::exp(0.3 * x);
    };
    const RealFunction g = [&](double x) {
      return a * std::sin(b * x + c) + d * x * x + std::exp(0.3 * x);
    };
    NestedQuadrature nested(f, lo, hi);
    for (int n = 0; n <= 10; ++n) {
      if (n > 0) nested.refine();
      const long intervals = 1L << n;
      INFO("trial " << trial << " level " << n);
      REQUIRE(nested.level() == n);
      REQUIRE(nested.evaluations() == intervals + 1);
      REQUIRE(calls == intervals + 1);
      const double trap = oracle::trapezoid(g, lo, hi, intervals);
      REQUIRE(nested.trapezoid() == Approx(trap).epsilon(1e-12).margin(1e-13));
      if (n >= 1) {
        const double simp = oracle::simpson(g, lo, hi, intervals);
        REQUIRE(nested.simpson() == Approx(simp).epsilon(1e-12).margin(1e-13));
      }
    }
    const QuadratureModel model(g, lo, hi, QuadratureRule::Simpson);
    Stream stream(0);
    const auto levels = model.levels(stream, 1, 10);
    for (int n = 1; n <= 10; ++n) REQUIRE(levels[n - 1] == quadrature_level(model, n));
    auto walker = model.walk(stream, 3);
    REQUIRE(walker->value() == levels[2]);
    for (int n = 4; n <= 10; ++n) REQUIRE(walker->advance() == levels[n - 1]);
  }
}

TEST_CASE("rule exactness classes", "[quad]") {
  const RealFunction linear = [](double x) { return 3.0 * x - 2.0; };
  const RealFunction cubic = [](double x) { return x * x * x - 2.0 * x * x + x + 5.0; };
  const double lo = -1.3, hi = 2.1;
  const double linear_exact = 1.5 * (hi * hi - lo * lo) - 2.0 * (hi - lo);
  const auto antiderivative = [](double x) {
    return x * x * x * x / 4.0 - 2.0 * x * x * x / 3.0 + x * x / 2.0 + 5.0 * x;
  };
  const double cubic_exact = antiderivative(hi) - antiderivative(lo);
  const QuadratureModel trap(linear, lo, hi, QuadratureRule::Trapezoid);
  const QuadratureModel simp(cubic, lo, hi, QuadratureRule::Simpson);
  for (int n = 0; n <= 8; ++n) CHECK(quadrature_level(trap, n) == Approx(linear_exact).epsilon(1e-12));
  for (int n = 1; n <= 8; ++n) CHECK(quadrature_level(simp, n) == Approx(cubic_exact).epsilon(1e-12));
}

TEST_CASE("Simpson increments shrink by about 1/16", "[quad]") {
  const QuadratureModel simp(find_integrand("sin_pi_x").f, 0.0, 1.0, QuadratureRule::Simpson);
  for (int n = 4; n <= 6; ++n) {
    const double now = quadrature_level(simp, n + 1) - quadrature_level(simp, n);
    const double before = quadrature_level(simp, n) - quadrature_level(simp, n - 1);
    const double ratio = now / before;
    INFO("n = " << n << ", ratio = " << ratio);
    CHECK(ratio >= 1.0 / 20.0);
    CHECK(ratio <= 1.0 / 12.0);
  }
}

TEST_CASE("expected function evaluations", "[quad]") {
  CHECK(expected_evaluations(ShiftedGeometric{0.75, 2}) == Approx(7.0));
  CHECK(expected_evaluations(ShiftedGeometric{1.0 - 1e-12, 0}) == Approx(2.0).epsilon(1e-9));
  CHECK(expected_evaluations(ShiftedGeometric{0.6, 3}) == Approx(25.0));
  CHECK_THROWS_AS(expected_evaluations(ShiftedGeometric{0.5, 2}), DivergentCost);
  CHECK_THROWS_AS(expected_evaluations(ShiftedGeometric{0.3, 0}), DivergentCost);

  // Agreement with E[2^N + 1] sampled from the law.
  const auto law = TruncationLaw::shifted_geometric(0.75, 2);
  Stream stream(5);
  double total = 0.0;
  const int draws = 400000;
  for (int i = 0; i < draws; ++i) total += cumulative_cost(CostModel::Exponential,
                                                           sample_truncation_level(law, stream));
  CHECK(total / draws == Approx(7.0).epsilon(0.03));
}

TEST_CASE("crude Monte Carlo comparator", "[quad]") {
  const auto& sine = find_integrand("sin_pi_x");
  CHECK(crude_mc_variance(sine.f, 0.0, 1.0, 7) == Approx(0.013531).epsilon(1e-4));
  CHECK(crude_mc_variance(sine.f, 0.0, 1.0, 7) ==
        Approx((0.5 - 4.0 / (kPi * kPi)) / 7.0).epsilon(1e-12));
  CHECK(crude_mc_variance([](double) { return 4.2; }, -1.0, 3.0, 5) == Approx(0.0).margin(1e-12));
  CHECK(crude_mc_variance([](double x) { return x; }, 0.0, 1.0, 1) == Approx(1.0 / 12.0).epsilon(1e-12));
  // Scaled interval: (hi - lo) f(U) with U uniform on [0, 2] and f = x has variance 4/3.
  CHECK(crude_mc_variance([](double x) { return x; }, 0.0, 2.0, 1) == Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("debiased Simpson quadrature is unbiased", "[quad][statistical]") {
  const QuadratureModel simp(find_integrand("sin_pi_x").f, 0.0, 1.0, QuadratureRule::Simpson);
  const auto report = run_estimate(simp, TruncationLaw::shifted_geometric(0.75, 2), 1'000'000, 11);
  INFO("mean " << report.mean << " se " << report.std_error);
  CHECK(std::abs(report.mean - 2.0 / kPi) < 4.0 * report.std_error);
  CHECK(report.mean_cost == Approx(7.0).epsilon(0.02));
}

TEST_CASE("registries", "[registry]") {
  for (const char* name : {"sin_pi_x", "exp_x", "x_cubed", "sqrt_x"})
    CHECK_NOTHROW(find_integrand(name));
  CHECK_NOTHROW(find_root_problem("cubic_root"));
  CHECK_NOTHROW(find_root_problem("exp_root"));
  CHECK_THROWS_AS(find_integrand("nope"), InvalidArgument);
  CHECK_THROWS_AS(find_root_problem("nope"), InvalidArgument);
  for (const auto& item : integrand_registry()) {
    const QuadratureModel model(item.f, item.lo, item.hi, QuadratureRule::Trapezoid);
    CHECK(std::isfinite(quadrature_level(model, 6)));
  }
}
