#include "debias/level_model.hpp"

#include <cmath>

#include "debias/errors.hpp"

namespace debias {

double cumulative_cost(CostModel model, int n) {
  switch (model) {
    case CostModel::Linear:
      return static_cast<double>(n) + 1.0;
    case CostModel::Exponential:
      return std::ldexp(1.0, n) + 1.0;
  }
  return 0.0;
}

std::unique_ptr<LevelWalker> LevelSequenceModel::walk(Stream&, int) const {
  throw UnsupportedQuery("model does not support sequential level generation");
}

}  // namespace debias
