#include "debias/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "debias/errors.hpp"

namespace debias {

namespace {

void require_range(int first, int last) {
  if (first < 0 || last < first) throw InvalidLevel("invalid level range");
}

// Walks a sequence produced by a step function; level() starts at `first`.
class StepWalker final : public LevelWalker {
 public:
  StepWalker(int first, double value, std::function<double(double, int)> step)
      : level_(first), value_(value), step_(std::move(step)) {}

  int level() const override { return level_; }
  double value() const override { return value_; }
  double advance() override {
    ++level_;
    value_ = step_(value_, level_);
    return value_;
  }

 private:
  int level_;
  double value_;
  std::function<double(double, int)> step_;
};

class QuadratureWalker final : public LevelWalker {
 public:
  QuadratureWalker(const QuadratureModel& model, int first)
      : rule_(model.rule()), grid_(model.integrand(), model.lo(), model.hi()) {
    while (grid_.level() < first) grid_.refine();
  }

  int level() const override { return grid_.level(); }
  double value() const override { return grid_.value(rule_); }
  double advance() override {
    grid_.refine();
    return grid_.value(rule_);
  }

 private:
  QuadratureRule rule_;
  NestedQuadrature grid_;
};

}  // namespace

// ---------------------------------------------------------------------------

ToyGeometricModel::ToyGeometricModel(double b, double a, double r) : b_(b), a_(a), r_(r) {
  if (!(std::abs(r) < 1.0)) throw InvalidArgument("toy ratio r must satisfy |r| < 1");
}

double toy_level(const ToyGeometricModel& model, int n) {
  if (n < 0) throw InvalidLevel("level must be >= 0");
  return model.limit() + model.amplitude() * std::pow(model.ratio(), n);
}

std::vector<double> ToyGeometricModel::levels(Stream&, int first, int last) const {
  require_range(first, last);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  for (int n = first; n <= last; ++n) out.push_back(toy_level(*this, n));
  return out;
}

std::unique_ptr<LevelWalker> ToyGeometricModel::walk(Stream&, int first) const {
  if (first < 0) throw InvalidLevel("level must be >= 0");
  return std::make_unique<StepWalker>(first, toy_level(*this, first),
                                      [this](double, int n) { return toy_level(*this, n); });
}

// ---------------------------------------------------------------------------

NewtonModel::NewtonModel(RealFunction h, RealFunction dh, double alpha, double start_lo,
                         double start_hi)
    : h_(std::move(h)), dh_(std::move(dh)), alpha_(alpha), lo_(start_lo), hi_(start_hi) {
  if (!h_ || !dh_) throw InvalidArgument("Newton model needs h and h'");
  if (!(start_lo < start_hi)) throw InvalidArgument("Newton start interval must have lo < hi");
}

double NewtonModel::step(double x, int next_level) const {
  const double slope = dh_(x);
  if (slope == 0.0) throw LevelFailure(next_level, "derivative vanished in Newton step");
  const double raw = (h_(x) - alpha_) / slope;
  if (!std::isfinite(raw)) throw LevelFailure(next_level, "non-finite Newton step");
  return x - std::clamp(raw, -1.0, 1.0);
}

double NewtonModel::draw_start(Stream& stream) const {
  return lo_ + (hi_ - lo_) * uniform01(stream);
}

std::vector<double> newton_levels(const NewtonModel& model, int n_max, Stream& stream) {
  if (n_max < 0) throw InvalidLevel("n_max must be >= 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  out.push_back(model.draw_start(stream));
  for (int n = 1; n <= n_max; ++n) out.push_back(model.step(out.back(), n));
  return out;
}

std::vector<double> NewtonModel::levels(Stream& stream, int first, int last) const {
  require_range(first, last);
  auto all = newton_levels(*this, last, stream);
  all.erase(all.begin(), all.begin() + first);
  return all;
}

std::unique_ptr<LevelWalker> NewtonModel::walk(Stream& stream, int first) const {
  if (first < 0) throw InvalidLevel("level must be >= 0");
  double x = draw_start(stream);
  for (int n = 1; n <= first; ++n) x = step(x, n);
  return std::make_unique<StepWalker>(first, x,
                                      [this](double v, int n) { return step(v, n); });
}

// ---------------------------------------------------------------------------

NestedQuadrature::NestedQuadrature(const RealFunction& f, double lo, double hi)
    : f_(&f), lo_(lo), hi_(hi) {
  endpoints_ = f(lo) + f(hi);
  evaluations_ = 2;
}

void NestedQuadrature::refine() {
  ++level_;
  const long fresh = 1L << (level_ - 1);
  const double h = (hi_ - lo_) / static_cast<double>(1L << level_);
  double sum = 0.0;
  for (long k = 0; k < fresh; ++k) sum += (*f_)(lo_ + static_cast<double>(2 * k + 1) * h);
  earlier_midpoints_ += latest_midpoints_;
  latest_midpoints_ = sum;
  evaluations_ += fresh;
}

double NestedQuadrature::trapezoid() const {
  const double h = (hi_ - lo_) / static_cast<double>(1L << level_);
  return h * (0.5 * endpoints_ + earlier_midpoints_ + latest_midpoints_);
}

double NestedQuadrature::simpson() const {
  if (level_ < 1) throw InvalidLevel("Simpson's rule needs at least level 1 (2 intervals)");
  const double h = (hi_ - lo_) / static_cast<double>(1L << level_);
  return h / 3.0 * (endpoints_ + 4.0 * latest_midpoints_ + 2.0 * earlier_midpoints_);
}

QuadratureModel::QuadratureModel(RealFunction f, double lo, double hi, QuadratureRule rule)
    : f_(std::move(f)), lo_(lo), hi_(hi), rule_(rule) {
  if (!f_) throw InvalidArgument("quadrature model needs an integrand");
  if (!(lo < hi)) throw InvalidArgument("quadrature interval must have lo < hi");
}

double quadrature_level(const QuadratureModel& model, int n) {
  if (n < 0) throw InvalidLevel("level must be >= 0");
  if (n < model.min_level())
    throw InvalidLevel("Simpson's rule needs at least level 1 (2 intervals)");
  NestedQuadrature grid(model.integrand(), model.lo(), model.hi());
  while (grid.level() < n) grid.refine();
  return grid.value(model.rule());
}

std::vector<double> QuadratureModel::levels(Stream&, int first, int last) const {
  require_range(first, last);
  if (first < min_level()) throw InvalidLevel("Simpson's rule needs at least level 1");
  NestedQuadrature grid(f_, lo_, hi_);
  while (grid.level() < first) grid.refine();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  out.push_back(grid.value(rule_));
  while (grid.level() < last) {
    grid.refine();
    out.push_back(grid.value(rule_));
  }
  return out;
}

std::unique_ptr<LevelWalker> QuadratureModel::walk(Stream&, int first) const {
  if (first < min_level()) throw InvalidLevel("Simpson's rule needs at least level 1");
  return std::make_unique<QuadratureWalker>(*this, first);
}

double expected_evaluations(const ShiftedGeometric& law) {
  if (!(law.p > 0.5))
    throw DivergentCost("expected evaluations diverge for p <= 1/2");
  return 1.0 + std::ldexp(1.0, law.shift) * law.p / (2.0 * law.p - 1.0);
}

double crude_mc_variance(const RealFunction& f, double lo, double hi, long evals) {
  if (evals < 1) throw InvalidArgument("evals must be >= 1");
  if (!(lo < hi)) throw InvalidArgument("interval must have lo < hi");
  using boost::math::quadrature::gauss_kronrod;
  const double mean = gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
  const double square = gauss_kronrod<double, 61>::integrate(
      [&f](double x) {
        const double v = f(x);
        return v * v;
      },
      lo, hi, 15, 1e-14);
  return std::max(0.0, (hi - lo) * square - mean * mean) / static_cast<double>(evals);
}

// ---------------------------------------------------------------------------

const std::vector<Integrand>& integrand_registry() {
  static const std::vector<Integrand> registry = {
      {"sin_pi_x", [](double x) { return std::sin(std::numbers::pi * x); }, 0.0, 1.0},
      {"exp_x", [](double x) { return std::exp(x); }, 0.0, 1.0},
      {"x_cubed", [](double x) { return x * x * x; }, 0.0, 1.0},
      {"sqrt_x", [](double x) { return std::sqrt(x); }, 0.0, 1.0},
  };
  return registry;
}

const std::vector<RootProblem>& root_registry() {
  static const std::vector<RootProblem> registry = {
      {"cubic_root", [](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }},
      {"exp_root", [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }},
  };
  return registry;
}

const Integrand& find_integrand(std::string_view name) {
  for (const auto& entry : integrand_registry())
    if (entry.name == name) return entry;
  throw InvalidArgument("unknown integrand '" + std::string(name) + "'");
}

const RootProblem& find_root_problem(std::string_view name) {
  for (const auto& entry : root_registry())
    if (entry.name == name) return entry;
  throw InvalidArgument("unknown root function '" + std::string(name) + "'");
}

}  // namespace debias
