#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "debias/level_model.hpp"
#include "debias/random.hpp"
#include "debias/truncation_law.hpp"

namespace debias {

/// One realization of the debiased estimator.
struct Replicate {
  int level = 0;               // realized truncation level N
  int shift = 0;               // s
  std::vector<double> levels;  // X_s, ..., X_N
  std::vector<double> weights; // 1/Q_n for n = s+1..N (realized for adaptive laws)
  double y = 0.0;
  double cost = 0.0;
};

struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  long replicates = 0;  // accepted replicates M
  long failures = 0;    // adaptive guard exhaustions, excluded from every statistic
  double var_y = 0.0;
  std::optional<double> sigma2_hat_mean;  // absent for adaptive laws
  double mean_level = 0.0;
  double mean_cost = 0.0;
  std::uint64_t seed = 0;
};

/// Rejects pairings the estimator cannot run: shift below the model's minimum
/// level (InvalidLevel), or an exponential-cost model with a law whose E[2^N]
/// diverges (DivergentCost).
void validate_pairing(const LevelSequenceModel& model, const TruncationLaw& law);

/// Draws N, generates X_s..X_N from one realization, and forms
/// y = X_s + sum_{n=s+1}^{N} (X_n - X_{n-1}) / Q(n).
Replicate single_replicate(const LevelSequenceModel& model, const TruncationLaw& law,
                           Stream& stream);

/// Stopping-time replicate: the survival of level n is decided after X_n is
/// seen. Throws GuardExhausted when the level guard is reached.
Replicate adaptive_replicate(const LevelSequenceModel& model, const TruncationLaw& law,
                             Stream& stream);

/// Dispatches to single_replicate or adaptive_replicate.
Replicate draw_replicate(const LevelSequenceModel& model, const TruncationLaw& law,
                         Stream& stream);

/// Unbiased (over N) estimate of var(Y | sequence):
///   sum_n (dX_n)^2 (1-Q_n)/Q_n^2 + 2 sum_{j<n} dX_n dX_j (1-Q_j)/(Q_j Q_n).
double within_replicate_variance(const Replicate& rep, const TruncationLaw& law);

/// Frequency-weighted pooled mean; algebraically equal to the mean of y.
double pooled_average(std::span<const Replicate> replicates, const TruncationLaw& law);

struct ReplicateSet {
  std::vector<Replicate> replicates;  // accepted, in replicate-index order
  long failures = 0;
};

/// M replicates; replicate i draws from replicate_stream(seed, i).
ReplicateSet run_replicates(const LevelSequenceModel& model, const TruncationLaw& law, long M,
                            std::uint64_t seed, int threads = 1);

/// Same replicates as run_replicates, folded into a report in index order.
/// The result does not depend on `threads`.
EstimateReport run_estimate(const LevelSequenceModel& model, const TruncationLaw& law, long M,
                            std::uint64_t seed, int threads = 1);

EstimateReport summarize(std::span<const Replicate> replicates, const TruncationLaw& law,
                         std::uint64_t seed, long failures = 0);

/// A validated (model, law) pair.
class DebiasedEstimator {
 public:
  DebiasedEstimator(std::shared_ptr<const LevelSequenceModel> model, TruncationLaw law);

  const LevelSequenceModel& model() const noexcept { return *model_; }
  const TruncationLaw& law() const noexcept { return law_; }

  Replicate replicate(Stream& stream) const { return draw_replicate(*model_, law_, stream); }
  EstimateReport run(long M, std::uint64_t seed, int threads = 1) const {
    return run_estimate(*model_, law_, M, seed, threads);
  }

 private:
  std::shared_ptr<const LevelSequenceModel> model_;
  TruncationLaw law_;
};

}  // namespace debias
