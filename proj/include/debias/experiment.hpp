#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "debias/design.hpp"
#include "debias/errors.hpp"
#include "debias/estimator.hpp"
#include "debias/heston.hpp"

namespace debias::cli {

enum class Experiment { Toy, Quad, Root, Heston, Design };
enum class Format { Csv, Json };

/// A configuration value that cannot be used; `field()` names the option.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& what)
      : InvalidArgument("--" + field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUnexpected = 1,
  kConfigError = 2,
  kInfeasible = 3,
  kIoError = 4,
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Toy;

  // Truncation law. Unset values fall back to per-experiment defaults. With
  // `adaptive`, p is the survival decay factor instead of the stopping probability.
  std::optional<double> p;
  std::optional<int> shift;
  bool adaptive = false;
  double epsilon = 1e-3;
  long n_max = 1'000'000;

  long reps = 100'000;
  std::uint64_t seed = 20'110'515;
  int threads = 1;
  std::string out;  // empty: no report file
  Format format = Format::Json;

  // toy
  double toy_a = 1.0;
  double toy_b = 1.0;
  double toy_r = 0.5;

  // quad
  std::string integrand = "sin_pi_x";
  std::string rule = "simpson";
  std::optional<double> lo;
  std::optional<double> hi;

  // root
  std::string function = "cubic_root";
  double alpha = 1.0;
  double start_lo = -2.0;
  double start_hi = 3.0;

  // heston: preset first, then any explicit overrides
  std::string preset = "broadie_kaya_1";
  std::optional<double> s0, strike, rate, maturity, rho, kappa, theta, sigma_v, v0;

  // design
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double mean_level = 6.0;
  double amplitude = 1.0;
  std::vector<double> budgets = {10.0, 100.0, 1000.0, 10000.0};
  double curve_step = 0.01;
};

struct GeometricRow {
  double r;
  design::GeometricDesign design;
};

struct CostRow {
  double r;
  double budget;
  design::CostDesign design;
};

struct CurvePoint {
  double r;
  double inflation;
};

struct DesignTables {
  double mean_level = 0.0;
  double amplitude = 0.0;
  std::vector<GeometricRow> geometric;
  std::vector<CostRow> cost;
  std::vector<CurvePoint> inflation_curve;
  std::vector<std::string> skipped;  // infeasible grid points, one note each
};

struct ExperimentResult {
  Experiment experiment = Experiment::Toy;
  std::optional<EstimateReport> report;  // sampling experiments
  std::optional<DesignTables> design;    // design experiment
  std::string law_description;
  double wall_time_s = 0.0;
};

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

/// Resolves per-experiment defaults and builds the law. ConfigError on bad values.
TruncationLaw resolve_law(const ExperimentConfig& cfg);
heston::HestonParams resolve_heston(const ExperimentConfig& cfg);

/// Runs the experiment and, when cfg.out is set, writes the machine-readable report.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// CSV columns: experiment,seed,M,mean,stderr,var_y,sigma2_hat_mean,mean_N,mean_cost
/// (design: table,r,budget,s,q,variance,inflation). No wall time, so reruns are
/// byte-identical.
std::string render_csv(const ExperimentResult& result, const ExperimentConfig& cfg);
/// JSON report; the only run-dependent field is "wall_time_s".
std::string render_json(const ExperimentResult& result, const ExperimentConfig& cfg,
                        bool include_wall_time = true);
std::string render_summary(const ExperimentResult& result, const ExperimentConfig& cfg);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace debias::cli
