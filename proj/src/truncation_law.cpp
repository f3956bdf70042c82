#include "debias/truncation_law.hpp"

#include <cmath>
#include <string>

#include "debias/errors.hpp"

namespace debias {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_shift(int shift) {
  if (shift < 0) throw InvalidArgument("shift must be >= 0, got " + std::to_string(shift));
}

}  // namespace

TruncationLaw TruncationLaw::shifted_geometric(double p, int shift) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("geometric p must lie in (0,1), got " + std::to_string(p));
  require_shift(shift);
  return TruncationLaw(ShiftedGeometric{p, shift});
}

TruncationLaw TruncationLaw::table(int shift, std::vector<double> survival, double tail_ratio) {
  require_shift(shift);
  if (!(tail_ratio > 0.0 && tail_ratio < 1.0))
    throw InvalidArgument("table tail ratio must lie in (0,1)");
  double previous = 1.0;
  for (double q : survival) {
    if (!(q > 0.0 && q <= previous))
      throw InvalidArgument("survival table must be non-increasing within (0,1]");
    previous = q;
  }
  return TruncationLaw(TableLaw{shift, std::move(survival), tail_ratio});
}

TruncationLaw TruncationLaw::adaptive(double decay, double threshold, int shift, long n_max) {
  if (!(decay > 0.0 && decay < 1.0))
    throw InvalidArgument("adaptive decay factor must lie in (0,1)");
  if (!(threshold > 0.0)) throw InvalidArgument("adaptive threshold must be > 0");
  require_shift(shift);
  if (n_max <= shift) throw InvalidArgument("adaptive n_max must exceed the shift");
  return TruncationLaw(AdaptiveLaw{decay, threshold, shift, n_max});
}

int TruncationLaw::shift() const noexcept {
  return std::visit([](const auto& law) { return law.shift; }, law_);
}

double TruncationLaw::tail_ratio() const noexcept {
  return std::visit(Overloaded{
                        [](const ShiftedGeometric& g) { return 1.0 - g.p; },
                        [](const TableLaw& t) { return t.tail_ratio; },
                        [](const AdaptiveLaw& a) { return a.decay; },
                    },
                    law_);
}

double TruncationLaw::expected_level() const {
  return std::visit(
      Overloaded{
          [](const ShiftedGeometric& g) { return g.shift + (1.0 - g.p) / g.p; },
          [](const TableLaw& t) {
            double sum = t.shift;
            for (double q : t.survival) sum += q;
            const double last = t.survival.empty() ? 1.0 : t.survival.back();
            return sum + last * t.tail_ratio / (1.0 - t.tail_ratio);
          },
          [](const AdaptiveLaw&) -> double {
            throw UnsupportedQuery("adaptive law has no fixed expected level");
          },
      },
      law_);
}

double survival_probability(const TruncationLaw& law, int n) {
  if (n < 0) throw InvalidArgument("level must be >= 0");
  return std::visit(
      Overloaded{
          [n](const ShiftedGeometric& g) {
            if (n <= g.shift) return 1.0;
            return std::pow(1.0 - g.p, n - g.shift);
          },
          [n](const TableLaw& t) {
            if (n <= t.shift) return 1.0;
            const auto k = static_cast<std::size_t>(n - t.shift);
            if (k <= t.survival.size()) return t.survival[k - 1];
            const double last = t.survival.empty() ? 1.0 : t.survival.back();
            return last * std::pow(t.tail_ratio, static_cast<double>(k - t.survival.size()));
          },
          [](const AdaptiveLaw&) -> double {
            throw UnsupportedQuery(
                "survival of an adaptive law is realized per replicate, not a fixed function");
          },
      },
      law.variant());
}

int sample_truncation_level(const TruncationLaw& law, Stream& stream) {
  return std::visit(
      Overloaded{
          [&stream](const ShiftedGeometric& g) {
            const double u = uniform_open_closed(stream);
            return g.shift + static_cast<int>(std::floor(std::log(u) / std::log1p(-g.p)));
          },
          [&stream](const TableLaw& t) {
            const double u = uniform_open_closed(stream);
            int n = t.shift;
            for (double q : t.survival) {
              if (q < u) return n;
              ++n;
            }
            const double last = t.survival.empty() ? 1.0 : t.survival.back();
            return n + static_cast<int>(std::floor(std::log(u / last) / std::log(t.tail_ratio)));
          },
          [](const AdaptiveLaw&) -> int {
            throw UnsupportedQuery("adaptive laws are sampled along the sequence");
          },
      },
      law.variant());
}

bool has_finite_exponential_cost(const TruncationLaw& law) noexcept {
  return law.tail_ratio() < 0.5;
}

}  // namespace debias
