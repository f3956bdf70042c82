#pragma once

#include <limits>
#include <variant>
#include <vector>

#include "debias/random.hpp"

namespace debias {

/// N = s + G with G geometric on {0,1,...}: P(N=n) = p(1-p)^{n-s}, Q(n) = (1-p)^{n-s}.
struct ShiftedGeometric {
  double p;       // per-level stopping probability
  int shift = 0;  // guaranteed minimum level s
};

/// Explicit survival table Q(s+1..s+k) followed by a geometric tail
/// Q(s+k+j) = Q(s+k) * tail_ratio^j.
struct TableLaw {
  int shift = 0;
  std::vector<double> survival;
  double tail_ratio;
};

/// Stopping-time law. Realized survival stays put while |X_n - X_{n-1}| > threshold
/// and is multiplied by `decay` otherwise.
struct AdaptiveLaw {
  double decay;
  double threshold;
  int shift = 0;
  long n_max = 1'000'000;
};

/// Distribution of the random truncation level N.
class TruncationLaw {
 public:
  using Variant = std::variant<ShiftedGeometric, TableLaw, AdaptiveLaw>;

  /// Validating constructors; all throw InvalidArgument on bad parameters.
  static TruncationLaw shifted_geometric(double p, int shift = 0);
  static TruncationLaw table(int shift, std::vector<double> survival, double tail_ratio);
  static TruncationLaw adaptive(double decay, double threshold, int shift = 0,
                                long n_max = 1'000'000);

  const Variant& variant() const noexcept { return law_; }
  int shift() const noexcept;
  bool is_adaptive() const noexcept { return std::holds_alternative<AdaptiveLaw>(law_); }

  /// Ratio Q(n+1)/Q(n) far in the tail (for AdaptiveLaw: its decay factor).
  double tail_ratio() const noexcept;

  /// E[N]; UnsupportedQuery for adaptive laws.
  double expected_level() const;

 private:
  explicit TruncationLaw(Variant law) : law_(std::move(law)) {}

  Variant law_;
};

/// Q(n) = P(N >= n). Throws UnsupportedQuery for adaptive laws and
/// InvalidArgument for n < 0.
double survival_probability(const TruncationLaw& law, int n);

/// Draws N by inversion from a single uniform: N = max{n : Q(n) >= U}, U in (0,1].
int sample_truncation_level(const TruncationLaw& law, Stream& stream);

/// True when E[2^N] is finite, i.e. the tail survival ratio is below 1/2.
bool has_finite_exponential_cost(const TruncationLaw& law) noexcept;

}  // namespace debias
