#pragma once

// Command-line front end: `srb <subcommand> [--config FILE] [overrides]`.
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "srb/config.hpp"
#include "srb/harness.hpp"
#include "srb/selftest.hpp"

namespace srb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

namespace detail {

struct Override {
  const char* flag;
  const char* key;
  const char* help;
};

inline const std::vector<Override>& experiment_overrides() {
  static const std::vector<Override> v{
      {"--seed", "seed", "master seed"},
      {"--paths", "paths", "number of Monte-Carlo paths S"},
      {"--out", "output", "CSV output path"},
      {"--methods", "methods", "comma-separated methods (EM, LieTrotter, VoC, FRB, RandomInertiaSplitting, Midpoint)"},
      {"--steps", "steps", "comma-separated step counts over the horizon"},
      {"--a", "a", "noise amplitude"},
      {"--epsilon", "epsilon", "inertia perturbation scale"},
      {"--horizon", "horizon", "final time"},
      {"--paths-grid", "paths_grid", "comma-separated path counts for the reference study"},
      {"--reference-steps", "reference_steps", "step count of the reference solution"},
      {"--reference-method", "reference_method", "method of the reference solution"},
      {"--stride", "record_stride", "trajectory output stride"},
      {"--magnus", "magnus", "full_step or half_step"},
      {"--workers", "workers", "worker threads (0: all cores)"},
  };
  return v;
}

inline void report_diagnostics(const ExperimentReport& rep, std::ostream& err) {
  for (const auto& d : rep.diagnostics)
    err << "numerical failure: method=" << method_name(d.method) << " h=" << num(d.h) << " path=" << d.path
        << " step=" << d.step << ": " << d.message << '\n';
}

}  // namespace detail

/// Parses argv, runs the selected subcommand and returns the exit code.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic rigid body integrators and experiments", "srb"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    Experiment experiment;
    std::string config_path;
    std::vector<std::optional<std::string>> values;
  };
  std::vector<Sub> subs;
  const std::pair<const char*, Experiment> experiment_commands[] = {
      {"weak-convergence", Experiment::WeakConvergence}, {"reference-study", Experiment::ReferenceStudy},
      {"benchmark", Experiment::CpuBenchmark},           {"trajectory", Experiment::Trajectory},
      {"energy-drift", Experiment::EnergyDrift},
  };
  subs.reserve(std::size(experiment_commands));
  for (const auto& [name, exp] : experiment_commands) {
    subs.push_back({app.add_subcommand(name, "run the " + std::string(experiment_name(exp)) + " experiment"), exp, {}, {}});
    Sub& s = subs.back();
    s.values.resize(detail::experiment_overrides().size());
    s.app->add_option("--config", s.config_path, "configuration file")->check(CLI::ExistingFile);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const auto& o = detail::experiment_overrides()[i];
      s.app->add_option(o.flag, s.values[i], o.help);
    }
  }

  std::uint64_t frb_seed = 7;
  std::size_t frb_cases = 100;
  CLI::App* frb_cmd = app.add_subcommand("frb-check", "compare the exact free-rigid-body flow with an RK4 oracle");
  frb_cmd->add_option("--seed", frb_seed, "seed of the random initial conditions");
  frb_cmd->add_option("--cases", frb_cases, "number of initial conditions")->check(CLI::PositiveNumber);
  CLI::App* self_cmd = app.add_subcommand("selftest", "run the invariant suites of every module");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  if (*frb_cmd) {
    const auto s = frb_check(frb_cases, 100000, frb_seed);
    char buf[160];
    std::snprintf(buf, sizeof buf, "frb-check: %zu cases, max |exact - oracle| = %.3e, max group deviation = %.3e\n", s.cases,
                  s.max_oracle_deviation, s.max_group_deviation);
    out << buf;
    const bool ok = s.max_oracle_deviation <= 1e-8 && s.max_group_deviation <= 1e-11;
    if (!ok) err << "frb-check: deviation above the 1e-8 / 1e-11 bounds\n";
    return ok ? kExitOk : kExitNumerical;
  }
  if (*self_cmd) {
    try {
      return print_checks(run_selftest(), out) ? kExitOk : kExitNumerical;
    } catch (const std::exception& e) {
      err << "selftest aborted: " << e.what() << '\n';
      return kExitNumerical;
    }
  }

  for (auto& s : subs) {
    if (!*s.app) continue;
    ExperimentConfig cfg;
    try {
      cfg = s.config_path.empty() ? default_config(s.experiment) : load_config(s.config_path);
      const bool matches = cfg.experiment == s.experiment ||
                           (s.experiment == Experiment::CpuBenchmark && cfg.experiment == Experiment::RelativeCost);
      if (!matches)
        throw ConfigError("experiment", 0,
                          "config describes '" + std::string(experiment_name(cfg.experiment)) + "' but the subcommand is '" +
                              s.app->get_name() + "'");
      for (std::size_t i = 0; i < s.values.size(); ++i)
        if (s.values[i]) apply_config_value(cfg, detail::experiment_overrides()[i].key, detail::Entry{*s.values[i], 0});
    } catch (const ConfigError& e) {
      err << e.what() << '\n';
      return kExitUsage;
    }

    ExperimentReport rep;
    try {
      rep = run_experiment(cfg);
    } catch (const ConfigError& e) {
      err << e.what() << '\n';
      return kExitUsage;
    } catch (const std::invalid_argument& e) {
      err << "invalid setup: " << e.what() << '\n';
      return kExitUsage;
    } catch (const NumericalError& e) {
      err << "numerical failure: " << e.what() << '\n';
      return kExitNumerical;
    }

    const std::string path = cfg.output.empty() ? std::string(experiment_name(cfg.experiment)) + ".csv" : cfg.output;
    std::ofstream file(path);
    if (!file) {
      err << "cannot write '" << path << "'\n";
      return kExitUsage;
    }
    write_csv(rep, file);
    file.close();
    print_summary(rep, out);
    out << "  wrote " << path << '\n';
    detail::report_diagnostics(rep, err);
    return rep.ok() ? kExitOk : kExitNumerical;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace srb
