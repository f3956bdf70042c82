#pragma once

#include <memory>
#include <vector>

#include "debias/random.hpp"

namespace debias {

enum class CostModel {
  Linear,       // one unit per level value
  Exponential,  // 2^n + 1 cumulative units at level n (nested 2^n-interval grids)
};

/// Cumulative cost of producing levels up to n.
double cumulative_cost(CostModel model, int n);

/// Level-by-level cursor over one coupled realization, used by adaptive truncation.
class LevelWalker {
 public:
  virtual ~LevelWalker() = default;

  virtual int level() const = 0;
  virtual double value() const = 0;
  /// Moves to the next level and returns its value.
  virtual double advance() = 0;
};

/// A sequence of coupled approximations X_0, X_1, ... of a common limit.
///
/// Implementations are immutable after construction; all per-replicate state
/// lives in the stream and in locals of `levels`/`walk`.
class LevelSequenceModel {
 public:
  virtual ~LevelSequenceModel() = default;

  /// Smallest level the model can produce.
  virtual int min_level() const { return 0; }
  virtual CostModel cost_model() const = 0;

  /// X_first, ..., X_last from a single realization drawn from `stream`.
  virtual std::vector<double> levels(Stream& stream, int first, int last) const = 0;

  /// Sequential access starting at level `first`. Throws UnsupportedQuery
  /// unless the model overrides it.
  virtual std::unique_ptr<LevelWalker> walk(Stream& stream, int first) const;

  double cost(int n) const { return cumulative_cost(cost_model(), n); }
};

}  // namespace debias
