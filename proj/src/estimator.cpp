#include "debias/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "debias/errors.hpp"

namespace debias {

namespace {

struct Summary {
  double y = 0.0;
  double sigma2 = 0.0;
  double cost = 0.0;
  int level = 0;
  bool failed = false;
};

Summary summary_of(const Replicate& rep, const TruncationLaw& law) {
  Summary out;
  out.y = rep.y;
  out.level = rep.level;
  out.cost = rep.cost;
  out.sigma2 = law.is_adaptive() ? std::numeric_limits<double>::quiet_NaN()
                                 : within_replicate_variance(rep, law);
  return out;
}

// Runs body(i) for i in [0, M) on `threads` workers with contiguous chunks.
// The first exception by worker order is rethrown after all workers join.
template <class Body>
void parallel_for(long M, int threads, Body&& body) {
  const long workers = std::clamp<long>(threads, 1, std::max<long>(M, 1));
  if (workers == 1) {
    for (long i = 0; i < M; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long chunk = (M + workers - 1) / workers;
    for (long w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          const long end = std::min(M, (w + 1) * chunk);
          for (long i = w * chunk; i < end; ++i) body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

EstimateReport fold(std::span<const Summary> summaries, bool adaptive, std::uint64_t seed) {
  EstimateReport report;
  report.seed = seed;
  double sum_y = 0.0, sum_sigma2 = 0.0, sum_level = 0.0, sum_cost = 0.0;
  for (const auto& s : summaries) {
    if (s.failed) {
      ++report.failures;
      continue;
    }
    ++report.replicates;
    sum_y += s.y;
    sum_sigma2 += s.sigma2;
    sum_level += s.level;
    sum_cost += s.cost;
  }
  const long m = report.replicates;
  if (m < 2)
    throw InvalidState("fewer than 2 accepted replicates (" + std::to_string(report.failures) +
                       " failures)");
  const double md = static_cast<double>(m);
  report.mean = sum_y / md;
  double ss = 0.0;
  for (const auto& s : summaries) {
    if (s.failed) continue;
    const double d = s.y - report.mean;
    ss += d * d;
  }
  report.var_y = ss / (md - 1.0);
  report.std_error = std::sqrt(report.var_y / md);
  if (!adaptive) report.sigma2_hat_mean = sum_sigma2 / md;
  report.mean_level = sum_level / md;
  report.mean_cost = sum_cost / md;
  return report;
}

void require_replicate_count(long M) {
  if (M < 2) throw InvalidArgument("replicate count M must be >= 2, got " + std::to_string(M));
}

}  // namespace

void validate_pairing(const LevelSequenceModel& model, const TruncationLaw& law) {
  if (law.shift() < model.min_level())
    throw InvalidLevel("law shift " + std::to_string(law.shift()) +
                       " is below the model's minimum level " +
                       std::to_string(model.min_level()));
  if (model.cost_model() == CostModel::Exponential && !has_finite_exponential_cost(law))
    throw DivergentCost(
        "exponential-cost model needs a tail survival ratio below 1/2 "
        "(geometric p > 1/2); E[2^N] diverges otherwise");
}

Replicate single_replicate(const LevelSequenceModel& model, const TruncationLaw& law,
                           Stream& stream) {
  if (law.is_adaptive()) throw UnsupportedQuery("use adaptive_replicate for adaptive laws");
  validate_pairing(model, law);

  Replicate rep;
  rep.shift = law.shift();
  rep.level = sample_truncation_level(law, stream);
  rep.levels = model.levels(stream, rep.shift, rep.level);
  if (rep.levels.size() != static_cast<std::size_t>(rep.level - rep.shift + 1))
    throw InvalidState("model returned a level vector of the wrong length");

  rep.weights.reserve(rep.levels.size() - 1);
  double y = rep.levels.front();
  for (int n = rep.shift + 1; n <= rep.level; ++n) {
    const auto k = static_cast<std::size_t>(n - rep.shift);
    const double q = survival_probability(law, n);
    y += (rep.levels[k] - rep.levels[k - 1]) / q;
    rep.weights.push_back(1.0 / q);
  }
  rep.y = y;
  rep.cost = model.cost(rep.level);
  return rep;
}

Replicate adaptive_replicate(const LevelSequenceModel& model, const TruncationLaw& law,
                             Stream& stream) {
  const auto* rule = std::get_if<AdaptiveLaw>(&law.variant());
  if (rule == nullptr) throw UnsupportedQuery("adaptive_replicate requires an adaptive law");
  validate_pairing(model, law);

  Replicate rep;
  rep.shift = rule->shift;
  auto walker = model.walk(stream, rule->shift);
  double previous = walker->value();
  double survival = 1.0;
  double y = previous;
  rep.levels.push_back(previous);

  long n = rule->shift;
  for (;;) {
    if (n >= rule->n_max) throw GuardExhausted(rule->n_max);
    const double next = walker->advance();
    const double increment = next - previous;
    const double next_survival =
        std::abs(increment) > rule->threshold ? survival : rule->decay * survival;
    // P(N >= n+1 | X_s..X_{n+1}, N >= n) = Q_{n+1} / Q_n
    if (uniform01(stream) >= next_survival / survival) break;
    ++n;
    y += increment / next_survival;
    rep.levels.push_back(next);
    rep.weights.push_back(1.0 / next_survival);
    survival = next_survival;
    previous = next;
  }
  rep.level = static_cast<int>(n);
  rep.y = y;
  // The rejected candidate level was generated, so it is paid for.
  rep.cost = model.cost(rep.level + 1);
  return rep;
}

Replicate draw_replicate(const LevelSequenceModel& model, const TruncationLaw& law,
                         Stream& stream) {
  return law.is_adaptive() ? adaptive_replicate(model, law, stream)
                           : single_replicate(model, law, stream);
}

double within_replicate_variance(const Replicate& rep, const TruncationLaw& law) {
  const int s = rep.shift;
  const int count = rep.level - s;
  if (count <= 0) return 0.0;

  std::vector<double> increment(static_cast<std::size_t>(count));
  std::vector<double> q(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    increment[k] = rep.levels[k + 1] - rep.levels[k];
    q[k] = survival_probability(law, s + k + 1);
  }

  // tail = sum_{n>j} dX_n / Q_n, built from the top level down.
  double diagonal = 0.0, cross = 0.0, tail = 0.0;
  for (int k = count - 1; k >= 0; --k) {
    const double d = increment[k];
    const double stay = (1.0 - q[k]) / q[k];
    diagonal += d * d * stay / q[k];
    cross += d * stay * tail;
    tail += d / q[k];
  }
  // Not clamped at zero: a clamp would bias the estimate upward.
  return diagonal + 2.0 * cross;
}

double pooled_average(std::span<const Replicate> replicates, const TruncationLaw& law) {
  if (replicates.empty()) throw InvalidArgument("pooled_average needs at least one replicate");
  if (law.is_adaptive()) throw UnsupportedQuery("pooled_average requires a non-adaptive law");

  const int s = replicates.front().shift;
  int max_level = s;
  double base = 0.0;
  for (const auto& rep : replicates) {
    if (rep.shift != s) throw InvalidArgument("replicates drawn with different shifts");
    max_level = std::max(max_level, rep.level);
    base += rep.levels.front();
  }
  const double m = static_cast<double>(replicates.size());
  double pooled = base / m;

  for (int n = s + 1; n <= max_level; ++n) {
    const auto k = static_cast<std::size_t>(n - s);
    double sum = 0.0;
    long reached = 0;
    for (const auto& rep : replicates) {
      if (rep.level < n) continue;
      sum += rep.levels[k] - rep.levels[k - 1];
      ++reached;
    }
    const double mean_increment = sum / static_cast<double>(reached);
    const double frequency = static_cast<double>(reached) / m;
    pooled += mean_increment * frequency / survival_probability(law, n);
  }
  return pooled;
}

ReplicateSet run_replicates(const LevelSequenceModel& model, const TruncationLaw& law, long M,
                            std::uint64_t seed, int threads) {
  require_replicate_count(M);
  validate_pairing(model, law);
  std::vector<std::optional<Replicate>> slots(static_cast<std::size_t>(M));
  parallel_for(M, threads, [&](long i) {
    Stream stream = replicate_stream(seed, static_cast<std::uint64_t>(i));
    try {
      slots[static_cast<std::size_t>(i)] = draw_replicate(model, law, stream);
    } catch (const GuardExhausted&) {
    }
  });
  ReplicateSet out;
  out.replicates.reserve(slots.size());
  for (auto& slot : slots) {
    if (slot)
      out.replicates.push_back(std::move(*slot));
    else
      ++out.failures;
  }
  return out;
}

EstimateReport run_estimate(const LevelSequenceModel& model, const TruncationLaw& law, long M,
                            std::uint64_t seed, int threads) {
  require_replicate_count(M);
  validate_pairing(model, law);
  std::vector<Summary> summaries(static_cast<std::size_t>(M));
  parallel_for(M, threads, [&](long i) {
    Stream stream = replicate_stream(seed, static_cast<std::uint64_t>(i));
    auto& slot = summaries[static_cast<std::size_t>(i)];
    try {
      slot = summary_of(draw_replicate(model, law, stream), law);
    } catch (const GuardExhausted&) {
      slot.failed = true;
    }
  });
  return fold(summaries, law.is_adaptive(), seed);
}

EstimateReport summarize(std::span<const Replicate> replicates, const TruncationLaw& law,
                         std::uint64_t seed, long failures) {
  std::vector<Summary> summaries;
  summaries.reserve(replicates.size());
  for (const auto& rep : replicates) summaries.push_back(summary_of(rep, law));
  auto report = fold(summaries, law.is_adaptive(), seed);
  report.failures = failures;
  return report;
}

DebiasedEstimator::DebiasedEstimator(std::shared_ptr<const LevelSequenceModel> model,
                                     TruncationLaw law)
    : model_(std::move(model)), law_(std::move(law)) {
  if (!model_) throw InvalidArgument("estimator needs a model");
  validate_pairing(*model_, law_);
}

}  // namespace debias
