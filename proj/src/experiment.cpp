#include "debias/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "debias/sequences.hpp"

namespace debias::cli {

namespace {

using nlohmann::ordered_json;

struct LawDefaults {
  double p;
  int shift;
};

LawDefaults law_defaults(Experiment e) {
  switch (e) {
    case Experiment::Toy:
      return {0.5, 0};
    case Experiment::Quad:
      return {0.75, 2};
    case Experiment::Root:
      // Survival ratio 3/4 after a guaranteed 4 Newton steps.
      return {0.25, 4};
    case Experiment::Heston:
      return {0.75, 4};
    case Experiment::Design:
      break;
  }
  return {0.5, 0};
}

std::string number(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

QuadratureRule parse_rule(const std::string& name) {
  if (name == "simpson") return QuadratureRule::Simpson;
  if (name == "trapezoid") return QuadratureRule::Trapezoid;
  throw ConfigError("rule", "unknown quadrature rule '" + name + "' (simpson, trapezoid)");
}

std::shared_ptr<const LevelSequenceModel> make_model(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::Toy:
      try {
        return std::make_shared<ToyGeometricModel>(cfg.toy_b, cfg.toy_a, cfg.toy_r);
      } catch (const InvalidArgument& e) {
        throw ConfigError("r", e.what());
      }
    case Experiment::Quad: {
      const Integrand* entry = nullptr;
      try {
        entry = &find_integrand(cfg.integrand);
      } catch (const InvalidArgument& e) {
        throw ConfigError("integrand", e.what());
      }
      const double lo = cfg.lo.value_or(entry->lo);
      const double hi = cfg.hi.value_or(entry->hi);
      if (!(lo < hi)) throw ConfigError("lo", "integration interval needs lo < hi");
      return std::make_shared<QuadratureModel>(entry->f, lo, hi, parse_rule(cfg.rule));
    }
    case Experiment::Root: {
      const RootProblem* entry = nullptr;
      try {
        entry = &find_root_problem(cfg.function);
      } catch (const InvalidArgument& e) {
        throw ConfigError("function", e.what());
      }
      if (!(cfg.start_lo < cfg.start_hi))
        throw ConfigError("start-lo", "start interval needs start-lo < start-hi");
      return std::make_shared<NewtonModel>(entry->h, entry->dh, cfg.alpha, cfg.start_lo,
                                           cfg.start_hi);
    }
    case Experiment::Heston:
      return heston::heston_level_model(resolve_heston(cfg));
    case Experiment::Design:
      break;
  }
  throw ConfigError("experiment", "design has no level sequence model");
}

std::string describe(const TruncationLaw& law) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ShiftedGeometric>)
          os << "shifted_geometric(p=" << number(l.p) << ", s=" << l.shift << ")";
        else if constexpr (std::is_same_v<T, TableLaw>)
          os << "table(s=" << l.shift << ", k=" << l.survival.size() << ")";
        else
          os << "adaptive(decay=" << number(l.decay) << ", epsilon=" << number(l.threshold)
             << ", s=" << l.shift << ", n_max=" << l.n_max << ")";
      },
      law.variant());
  return os.str();
}

DesignTables run_design(const ExperimentConfig& cfg) {
  DesignTables tables;
  tables.mean_level = cfg.mean_level;
  tables.amplitude = cfg.amplitude;
  for (double r : cfg.ratios)
    if (!(std::abs(r) > 0.0 && std::abs(r) < 1.0))
      throw ConfigError("r", "every ratio must satisfy 0 < |r| < 1, got " + number(r));
  for (double c : cfg.budgets)
    if (!(c > 1.0)) throw ConfigError("budget", "every budget must exceed 1, got " + number(c));
  if (!(cfg.curve_step > 0.0 && cfg.curve_step < 0.5))
    throw ConfigError("curve-step", "curve step must lie in (0, 0.5)");

  for (double r : cfg.ratios) {
    try {
      tables.geometric.push_back({r, design::optimal_geometric_design(r, cfg.mean_level,
                                                                     cfg.amplitude)});
    } catch (const InfeasibleBudget& e) {
      tables.skipped.push_back("geometric r=" + number(r) + ": " + e.what());
    }
    for (double c : cfg.budgets) {
      try {
        tables.cost.push_back({r, c, design::cost_constrained_design(r, c)});
      } catch (const InfeasibleBudget& e) {
        tables.skipped.push_back("cost r=" + number(r) + " c=" + number(c) + ": " + e.what());
      }
    }
  }
  if (tables.geometric.empty() && tables.cost.empty())
    throw InfeasibleBudget("no feasible design on the requested grid");

  const long points = std::lround(1.0 / cfg.curve_step);
  for (long i = 1; i < points; ++i) {
    const double r = static_cast<double>(i) * cfg.curve_step;
    tables.inflation_curve.push_back({r, design::mse_inflation_factor(r)});
  }
  return tables;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open output file '" + path + "'");
  file << content;
  file.flush();
  if (!file) throw IoError("failed writing output file '" + path + "'");
}

ordered_json report_json(const EstimateReport& r) {
  ordered_json j;
  j["seed"] = r.seed;
  j["M"] = r.replicates;
  j["mean"] = r.mean;
  j["stderr"] = r.std_error;
  j["var_y"] = r.var_y;
  j["sigma2_hat_mean"] = r.sigma2_hat_mean ? ordered_json(*r.sigma2_hat_mean) : ordered_json();
  j["mean_N"] = r.mean_level;
  j["mean_cost"] = r.mean_cost;
  j["failures"] = r.failures;
  return j;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Toy:
      return "toy";
    case Experiment::Quad:
      return "quad";
    case Experiment::Root:
      return "root";
    case Experiment::Heston:
      return "heston";
    case Experiment::Design:
      return "design";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  static const std::map<std::string, Experiment> names = {
      {"toy", Experiment::Toy},       {"quad", Experiment::Quad},
      {"root", Experiment::Root},     {"heston", Experiment::Heston},
      {"design", Experiment::Design},
  };
  const auto it = names.find(name);
  if (it == names.end()) throw ConfigError("experiment", "unknown experiment '" + name + "'");
  return it->second;
}

TruncationLaw resolve_law(const ExperimentConfig& cfg) {
  const LawDefaults defaults = law_defaults(cfg.experiment);
  try {
    if (cfg.adaptive) {
      const int min_shift = cfg.experiment == Experiment::Quad && cfg.rule == "simpson" ? 1 : 0;
      return TruncationLaw::adaptive(cfg.p.value_or(0.75), cfg.epsilon,
                                     cfg.shift.value_or(min_shift), cfg.n_max);
    }
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    if (what.find("threshold") != std::string::npos) throw ConfigError("epsilon", what);
    if (what.find("n_max") != std::string::npos) throw ConfigError("n-max", what);
    if (what.find("shift") != std::string::npos) throw ConfigError("shift", what);
    throw ConfigError("p", what);
  }
  const int shift = cfg.shift.value_or(defaults.shift);
  if (shift < 0) throw ConfigError("shift", "shift must be >= 0");
  try {
    return TruncationLaw::shifted_geometric(cfg.p.value_or(defaults.p), shift);
  } catch (const InvalidArgument& e) {
    throw ConfigError("p", e.what());
  }
}

heston::HestonParams resolve_heston(const ExperimentConfig& cfg) {
  heston::HestonParams p{};
  try {
    p = heston::preset(cfg.preset);
  } catch (const InvalidArgument& e) {
    throw ConfigError("preset", e.what());
  }
  const std::pair<const std::optional<double>*, double*> overrides[] = {
      {&cfg.s0, &p.s0},       {&cfg.strike, &p.strike}, {&cfg.rate, &p.rate},
      {&cfg.maturity, &p.maturity}, {&cfg.rho, &p.rho},   {&cfg.kappa, &p.kappa},
      {&cfg.theta, &p.theta}, {&cfg.sigma_v, &p.sigma_v}, {&cfg.v0, &p.v0},
  };
  for (const auto& [source, target] : overrides)
    if (*source) *target = **source;

  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  require(p.s0 > 0.0 && std::isfinite(p.s0), "s0", "spot must be positive");
  require(p.strike > 0.0 && std::isfinite(p.strike), "strike", "strike must be positive");
  require(std::isfinite(p.rate), "rate", "rate must be finite");
  require(p.maturity > 0.0 && std::isfinite(p.maturity), "maturity", "maturity must be positive");
  require(std::abs(p.rho) <= 1.0, "rho", "correlation must lie in [-1, 1]");
  require(p.kappa > 0.0 && std::isfinite(p.kappa), "kappa", "kappa must be positive");
  require(p.theta > 0.0 && std::isfinite(p.theta), "theta", "theta must be positive");
  require(p.sigma_v > 0.0 && std::isfinite(p.sigma_v), "sigma-v", "sigma_v must be positive");
  require(p.v0 >= 0.0 && std::isfinite(p.v0), "v0", "v0 must be >= 0");
  return p;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.experiment = cfg.experiment;

  if (cfg.reps < 2) throw ConfigError("reps", "replicate count must be >= 2");
  if (cfg.threads < 1) throw ConfigError("threads", "thread count must be >= 1");

  if (cfg.experiment == Experiment::Design) {
    result.design = run_design(cfg);
  } else {
    const auto law = resolve_law(cfg);
    const auto model = make_model(cfg);
    result.law_description = describe(law);
    std::optional<DebiasedEstimator> estimator;
    try {
      estimator.emplace(model, law);
    } catch (const InvalidLevel& e) {
      throw ConfigError("shift", e.what());
    }
    result.report = estimator->run(cfg.reps, cfg.seed, cfg.threads);
  }
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!cfg.out.empty())
    write_file(cfg.out, cfg.format == Format::Csv ? render_csv(result, cfg)
                                                  : render_json(result, cfg));
  return result;
}

std::string render_csv(const ExperimentResult& result, const ExperimentConfig& cfg) {
  std::ostringstream os;
  if (result.design) {
    const auto& t = *result.design;
    os << "table,r,budget,s,q,variance,inflation\n";
    for (const auto& row : t.geometric) {
      const auto& d = row.design;
      os << "geometric," << number(row.r) << ',' << number(t.mean_level) << ',' << number(d.s)
         << ',' << number(d.q) << ',' << number(d.min_variance) << ',' << number(d.inflation)
         << '\n';
      os << "geometric_rounded," << number(row.r) << ',' << number(t.mean_level) << ','
         << d.s_rounded << ',' << number(d.q_rounded) << ',' << number(d.rounded_variance)
         << ',' << number(d.inflation) << '\n';
    }
    for (const auto& row : t.cost)
      os << "cost," << number(row.r) << ',' << number(row.budget) << ',' << row.design.s << ','
         << number(row.design.q) << ',' << number(row.design.objective) << ",\n";
    for (const auto& point : t.inflation_curve)
      os << "inflation," << number(point.r) << ",,,,," << number(point.inflation) << '\n';
    return os.str();
  }
  const auto& r = *result.report;
  os << "experiment,seed,M,mean,stderr,var_y,sigma2_hat_mean,mean_N,mean_cost\n";
  os << to_string(cfg.experiment) << ',' << r.seed << ',' << r.replicates << ',' << number(r.mean)
     << ',' << number(r.std_error) << ',' << number(r.var_y) << ','
     << (r.sigma2_hat_mean ? number(*r.sigma2_hat_mean) : std::string()) << ','
     << number(r.mean_level) << ',' << number(r.mean_cost) << '\n';
  return os.str();
}

std::string render_json(const ExperimentResult& result, const ExperimentConfig& cfg,
                        bool include_wall_time) {
  ordered_json j;
  j["experiment"] = to_string(cfg.experiment);
  if (result.report) {
    j["law"] = result.law_description;
    j["report"] = report_json(*result.report);
  }
  if (result.design) {
    const auto& t = *result.design;
    j["mu_N"] = t.mean_level;
    j["a"] = t.amplitude;
    auto& geometric = j["geometric"] = ordered_json::array();
    for (const auto& row : t.geometric) {
      const auto& d = row.design;
      geometric.push_back({{"r", row.r},
                           {"q", d.q},
                           {"s", d.s},
                           {"min_variance", d.min_variance},
                           {"s_rounded", d.s_rounded},
                           {"q_rounded", d.q_rounded},
                           {"rounded_variance", d.rounded_variance},
                           {"inflation", d.inflation}});
    }
    auto& cost = j["cost"] = ordered_json::array();
    for (const auto& row : t.cost)
      cost.push_back({{"r", row.r},
                      {"budget", row.budget},
                      {"s", row.design.s},
                      {"q", row.design.q},
                      {"objective", row.design.objective}});
    auto& curve = j["inflation_curve"] = ordered_json::array();
    for (const auto& point : t.inflation_curve)
      curve.push_back({{"r", point.r}, {"inflation", point.inflation}});
    j["skipped"] = t.skipped;
  }
  if (include_wall_time) j["wall_time_s"] = result.wall_time_s;
  return j.dump(2) + "\n";
}

std::string render_summary(const ExperimentResult& result, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "experiment: " << to_string(cfg.experiment) << '\n';
  if (result.report) {
    const auto& r = *result.report;
    char line[256];
    os << "law:        " << result.law_description << '\n';
    std::snprintf(line, sizeof line,
                  "estimate:   %.10g  (stderr %.4g, M=%ld, failures=%ld)\n"
                  "var_y:      %.6g\n",
                  r.mean, r.std_error, r.replicates, r.failures, r.var_y);
    os << line;
    if (r.sigma2_hat_mean) {
      std::snprintf(line, sizeof line, "sigma2_hat: %.6g  (within-replicate, diagnostic)\n",
                    *r.sigma2_hat_mean);
      os << line;
    }
    std::snprintf(line, sizeof line, "mean N:     %.6g\nmean cost:  %.6g\n", r.mean_level,
                  r.mean_cost);
    os << line;
  }
  if (result.design) {
    const auto& t = *result.design;
    char line[256];
    std::snprintf(line, sizeof line, "%6s %10s %10s %12s %6s %10s %12s\n", "r", "q", "s",
                  "min_var", "s_int", "q_int", "inflation");
    os << "geometric design at E[N] = " << number(t.mean_level) << '\n' << line;
    for (const auto& row : t.geometric) {
      const auto& d = row.design;
      std::snprintf(line, sizeof line, "%6.3g %10.4g %10.4g %12.4g %6d %10.4g %12.4g\n", row.r,
                    d.q, d.s, d.min_variance, d.s_rounded, d.q_rounded, d.inflation);
      os << line;
    }
    os << "cost-constrained design\n";
    for (const auto& row : t.cost) {
      std::snprintf(line, sizeof line, "  r=%-5.3g c=%-8.6g s=%-3d q=%-10.4g objective=%.4g\n",
                    row.r, row.budget, row.design.s, row.design.q, row.design.objective);
      os << line;
    }
    for (const auto& note : t.skipped) os << "skipped " << note << '\n';
  }
  char line[64];
  std::snprintf(line, sizeof line, "wall time:  %.3f s\n", result.wall_time_s);
  os << line;
  return os.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  CLI::App app{"Unbiased estimation of sequence limits by randomized truncation", "debias"};
  app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
  app.require_subcommand(1);

  std::string format = "json";
  app.add_option("--reps", cfg.reps, "replicate count M");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--p", cfg.p, "geometric stopping probability (adaptive: decay factor)");
  app.add_option("--shift", cfg.shift, "guaranteed minimum level s");
  app.add_flag("--adaptive", cfg.adaptive, "use the adaptive stopping-time law");
  app.add_option("--epsilon", cfg.epsilon, "adaptive increment threshold");
  app.add_option("--n-max", cfg.n_max, "adaptive level guard");
  app.add_option("--threads", cfg.threads, "worker threads");
  app.add_option("--out", cfg.out, "report file");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  auto* toy = app.add_subcommand("toy", "geometric toy sequence b + a r^n")->fallthrough();
  toy->add_option("--a", cfg.toy_a);
  toy->add_option("--b", cfg.toy_b);
  toy->add_option("--r", cfg.toy_r);

  auto* quad = app.add_subcommand("quad", "debiased nested quadrature")->fallthrough();
  quad->add_option("--integrand", cfg.integrand);
  quad->add_option("--rule", cfg.rule);
  quad->add_option("--lo", cfg.lo);
  quad->add_option("--hi", cfg.hi);

  auto* root = app.add_subcommand("root", "debiased clamped Newton iteration")->fallthrough();
  root->add_option("--function", cfg.function);
  root->add_option("--alpha", cfg.alpha);
  root->add_option("--start-lo", cfg.start_lo);
  root->add_option("--start-hi", cfg.start_hi);

  auto* heston = app.add_subcommand("heston", "Heston call price")->fallthrough();
  heston->add_option("--preset", cfg.preset);
  heston->add_option("--s0", cfg.s0);
  heston->add_option("--strike", cfg.strike);
  heston->add_option("--rate", cfg.rate);
  heston->add_option("--maturity", cfg.maturity);
  heston->add_option("--rho", cfg.rho);
  heston->add_option("--kappa", cfg.kappa);
  heston->add_option("--theta", cfg.theta);
  heston->add_option("--sigma-v", cfg.sigma_v);
  heston->add_option("--v0", cfg.v0);

  auto* design = app.add_subcommand("design", "truncation-law design tables")->fallthrough();
  design->add_option("--r", cfg.ratios, "ratio grid");
  design->add_option("--mu-n", cfg.mean_level, "expected level budget");
  design->add_option("--a", cfg.amplitude);
  design->add_option("--budget", cfg.budgets, "expected function-evaluation budgets");
  design->add_option("--curve-step", cfg.curve_step, "inflation curve spacing in r");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  for (auto* sub : app.get_subcommands()) cfg.experiment = parse_experiment(sub->get_name());
  cfg.format = format == "csv" ? Format::Csv : Format::Json;

  try {
    const auto result = run_experiment(cfg);
    out << render_summary(result, cfg);
    if (!cfg.out.empty()) out << "report:     " << cfg.out << '\n';
    return kSuccess;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergentCost& e) {
    err << "infeasible: --p: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InfeasibleBudget& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InfeasibleLaw& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const IoError& e) {
    err << "io error: --out: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}

}  // namespace debias::cli
