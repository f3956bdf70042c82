#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "debias/level_model.hpp"
#include "debias/random.hpp"
#include "debias/truncation_law.hpp"

namespace debias {

using RealFunction = std::function<double(double)>;

// ---------------------------------------------------------------------------
// Geometric toy sequence X_n = b + a r^n

class ToyGeometricModel final : public LevelSequenceModel {
 public:
  ToyGeometricModel(double b, double a, double r);

  double limit() const noexcept { return b_; }
  double amplitude() const noexcept { return a_; }
  double ratio() const noexcept { return r_; }

  CostModel cost_model() const override { return CostModel::Linear; }
  std::vector<double> levels(Stream& stream, int first, int last) const override;
  std::unique_ptr<LevelWalker> walk(Stream& stream, int first) const override;

 private:
  double b_, a_, r_;
};

double toy_level(const ToyGeometricModel& model, int n);

// ---------------------------------------------------------------------------
// Clamped Newton iteration with a uniform random start

class NewtonModel final : public LevelSequenceModel {
 public:
  NewtonModel(RealFunction h, RealFunction dh, double alpha, double start_lo, double start_hi);

  /// X_{n+1} = X_n - clamp((h(X_n) - alpha) / h'(X_n), -1, 1).
  /// Throws LevelFailure(n+1) when h'(X_n) is zero or the step is not finite.
  double step(double x, int next_level) const;
  double draw_start(Stream& stream) const;

  CostModel cost_model() const override { return CostModel::Linear; }
  std::vector<double> levels(Stream& stream, int first, int last) const override;
  std::unique_ptr<LevelWalker> walk(Stream& stream, int first) const override;

 private:
  RealFunction h_, dh_;
  double alpha_, lo_, hi_;
};

/// X_0 ... X_{n_max} of one trajectory.
std::vector<double> newton_levels(const NewtonModel& model, int n_max, Stream& stream);

// ---------------------------------------------------------------------------
// Nested composite quadrature on 2^n-interval grids

enum class QuadratureRule { Trapezoid, Simpson };

/// Incremental evaluation of a composite rule; refining to level n+1 only
/// evaluates the 2^n new midpoints.
class NestedQuadrature {
 public:
  NestedQuadrature(const RealFunction& f, double lo, double hi);

  int level() const noexcept { return level_; }
  long evaluations() const noexcept { return evaluations_; }

  void refine();
  double trapezoid() const;
  /// Composite Simpson; InvalidLevel at level 0.
  double simpson() const;
  double value(QuadratureRule rule) const {
    return rule == QuadratureRule::Simpson ? simpson() : trapezoid();
  }

 private:
  const RealFunction* f_;
  double lo_, hi_;
  int level_ = 0;
  long evaluations_ = 0;
  double endpoints_ = 0.0;
  double earlier_midpoints_ = 0.0;  // midpoints added before the current level
  double latest_midpoints_ = 0.0;   // midpoints added at the current level
};

class QuadratureModel final : public LevelSequenceModel {
 public:
  QuadratureModel(RealFunction f, double lo, double hi, QuadratureRule rule);

  const RealFunction& integrand() const noexcept { return f_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  QuadratureRule rule() const noexcept { return rule_; }

  int min_level() const override { return rule_ == QuadratureRule::Simpson ? 1 : 0; }
  CostModel cost_model() const override { return CostModel::Exponential; }
  std::vector<double> levels(Stream& stream, int first, int last) const override;
  std::unique_ptr<LevelWalker> walk(Stream& stream, int first) const override;

 private:
  RealFunction f_;
  double lo_, hi_;
  QuadratureRule rule_;
};

/// Composite rule on the 2^n-interval grid.
double quadrature_level(const QuadratureModel& model, int n);

/// 1 + 2^s p / (2p - 1), the expected 2^N + 1 under a shifted geometric law.
/// DivergentCost for p <= 1/2.
double expected_evaluations(const ShiftedGeometric& law);

/// Variance of the crude Monte Carlo estimator (hi-lo) mean f(U_i) using
/// `evals` uniform points: ((hi-lo) int f^2 - (int f)^2) / evals.
double crude_mc_variance(const RealFunction& f, double lo, double hi, long evals);

// ---------------------------------------------------------------------------
// Named built-ins for the CLI

struct Integrand {
  std::string name;
  RealFunction f;
  double lo;
  double hi;
};

struct RootProblem {
  std::string name;
  RealFunction h;
  RealFunction dh;
};

const std::vector<Integrand>& integrand_registry();
const std::vector<RootProblem>& root_registry();

/// InvalidArgument when the name is unknown.
const Integrand& find_integrand(std::string_view name);
const RootProblem& find_root_problem(std::string_view name);

}  // namespace debias
