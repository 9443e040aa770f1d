#pragma once

// Experiment configuration and its flat `key = value` text format.
//
//   # comment
//   experiment = weak_convergence
//   inertia    = 0.9144, 1.098, 1.66
//   m0         = 0.4165, 0.9072, 0.0577
//   horizon    = 1
//   steps      = 2, 4, 8, 16
//
// Unknown keys, duplicate keys and malformed values are hard errors naming the
// key and line. The same format is used for the configuration echo written at
// the top of every report, so an echo parses back to the configuration that
// produced it.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srb/integrators.hpp"

namespace srb {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message)
      : std::runtime_error(format(key, line, message)), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& message) {
    std::string s = "config error";
    if (!key.empty()) s += " in key '" + key + "'";
    if (line > 0) s += " at line " + std::to_string(line);
    return s + ": " + message;
  }
  std::string key_;
  int line_;
};

enum class Experiment { WeakConvergence, ReferenceStudy, CpuBenchmark, RelativeCost, Trajectory, EnergyDrift };
enum class ModelKind { StochasticTorque, RandomInertia };

inline std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::WeakConvergence: return "weak_convergence";
    case Experiment::ReferenceStudy: return "reference_study";
    case Experiment::CpuBenchmark: return "cpu_benchmark";
    case Experiment::RelativeCost: return "relative_cost";
    case Experiment::Trajectory: return "trajectory";
    case Experiment::EnergyDrift: return "energy_drift";
  }
  return "?";
}

inline std::optional<Experiment> parse_experiment(std::string_view s) {
  for (Experiment e : {Experiment::WeakConvergence, Experiment::ReferenceStudy, Experiment::CpuBenchmark,
                       Experiment::RelativeCost, Experiment::Trajectory, Experiment::EnergyDrift})
    if (experiment_name(e) == s) return e;
  return std::nullopt;
}

struct ExperimentConfig {
  Experiment experiment{Experiment::WeakConvergence};
  ModelKind model{ModelKind::StochasticTorque};
  std::vector<Method> methods{Method::EM, Method::LieTrotter, Method::VoC};
  std::array<double, 3> inertia{0.9144, 1.098, 1.66};
  Vec3 m0{0.4165, 0.9072, 0.0577};
  double a{0.1};
  double epsilon{1e-3};
  MartingaleMode martingale_mode{MartingaleMode::Symmetric};
  double horizon{1.0};
  /// Step counts over the horizon.
  std::vector<std::size_t> steps{2, 4, 8, 16, 32, 64, 128, 256, 512};
  Method reference_method{Method::LieTrotter};
  std::size_t reference_steps{1024};
  std::size_t paths{1000};
  std::vector<std::size_t> paths_grid{100, 1000, 10000, 100000};
  std::uint64_t seed{1};
  MagnusVariant magnus{MagnusVariant::FullStep};
  bool track_attitude{false};
  std::size_t record_stride{1};
  int warmup{1};
  int repeats{5};

  // Execution settings; they never change results and are not echoed.
  unsigned workers{0};  // 0: hardware concurrency
  std::string output;

  InertiaTensor inertia_tensor() const { return {inertia[0], inertia[1], inertia[2]}; }
  ModelParams model_params() const { return {inertia_tensor(), a, m0}; }
  PerturbedInertia perturbed_inertia() const {
    return {inertia_tensor(), MartingaleMatrixSpec{epsilon, martingale_mode, seed}, m0};
  }
  StepOptions step_options() const {
    StepOptions o;
    o.magnus = magnus;
    o.track_attitude = track_attitude;
    return o;
  }

  /// Equality of everything that determines the results.
  bool same_experiment(const ExperimentConfig& o) const {
    return experiment == o.experiment && model == o.model && methods == o.methods && inertia == o.inertia &&
           m0 == o.m0 && a == o.a && epsilon == o.epsilon && martingale_mode == o.martingale_mode &&
           horizon == o.horizon && steps == o.steps && reference_method == o.reference_method &&
           reference_steps == o.reference_steps && paths == o.paths && paths_grid == o.paths_grid && seed == o.seed &&
           magnus == o.magnus && track_attitude == o.track_attitude && record_stride == o.record_stride &&
           warmup == o.warmup && repeats == o.repeats;
  }
};

/// Default settings for each experiment.
inline ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::WeakConvergence:
    case Experiment::CpuBenchmark:
    case Experiment::RelativeCost:
      break;
    case Experiment::ReferenceStudy:
      c.model = ModelKind::RandomInertia;
      c.methods = {Method::RandomInertiaSplitting};
      c.reference_method = Method::RandomInertiaSplitting;
      c.epsilon = 0.03;
      c.reference_steps = 256;
      break;
    case Experiment::Trajectory:
      c.methods = {Method::LieTrotter, Method::EM, Method::VoC};
      c.a = 0.001;
      c.horizon = 10000.0;
      c.steps = {100000};
      c.paths = 1;
      c.record_stride = 10;
      break;
    case Experiment::EnergyDrift:
      c.model = ModelKind::RandomInertia;
      c.methods = {Method::RandomInertiaSplitting, Method::Midpoint};
      c.horizon = 100.0;
      c.steps = {400};
      c.paths = 100;
      break;
  }
  return c;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Entry {
  std::string value;
  int line;
};

class ValueParser {
 public:
  ValueParser(const std::string& key, const Entry& e) : key_(key), e_(e) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(key_, e_.line, what + " (got '" + e_.value + "')");
  }

  double real(std::string_view s) const {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) fail("expected a finite real number");
    return v;
  }
  double real() const { return real(e_.value); }

  std::uint64_t unsigned_int(std::string_view s) const {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("expected a non-negative integer");
    return v;
  }
  std::uint64_t unsigned_int() const { return unsigned_int(e_.value); }

  std::vector<double> reals(std::size_t expected) const {
    std::vector<double> out;
    for (const auto& item : split_list(e_.value)) out.push_back(real(item));
    if (expected && out.size() != expected) fail("expected " + std::to_string(expected) + " comma-separated reals");
    return out;
  }

  std::vector<std::size_t> counts() const {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(e_.value)) {
      const auto v = unsigned_int(item);
      if (v == 0) fail("counts must be >= 1");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }

  bool boolean() const {
    if (e_.value == "true" || e_.value == "1") return true;
    if (e_.value == "false" || e_.value == "0") return false;
    fail("expected true or false");
  }

  Method method(std::string_view s) const {
    const auto m = parse_method(s);
    if (!m) fail("unknown method '" + std::string(s) + "'");
    return *m;
  }

  const std::string& raw() const { return e_.value; }

 private:
  const std::string& key_;
  const Entry& e_;
};

}  // namespace detail

inline const std::vector<std::string>& required_config_keys() {
  static const std::vector<std::string> keys{"experiment", "inertia", "m0", "horizon"};
  return keys;
}

inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys{
      "experiment", "model",      "methods", "inertia",         "m0",          "a",      "epsilon",
      "martingale_mode", "horizon", "steps", "reference_method", "reference_steps", "paths", "paths_grid",
      "seed",       "magnus",     "track_attitude", "record_stride", "warmup", "repeats", "workers", "output"};
  return keys;
}

/// Applies one key to cfg. Throws ConfigError on malformed values.
inline void apply_config_value(ExperimentConfig& cfg, const std::string& key, const detail::Entry& entry) {
  const detail::ValueParser p(key, entry);
  if (key == "experiment") {
    const auto e = parse_experiment(p.raw());
    if (!e) p.fail("unknown experiment");
    cfg.experiment = *e;
  } else if (key == "model") {
    if (p.raw() == "stochastic_torque") cfg.model = ModelKind::StochasticTorque;
    else if (p.raw() == "random_inertia") cfg.model = ModelKind::RandomInertia;
    else p.fail("expected stochastic_torque or random_inertia");
  } else if (key == "methods") {
    cfg.methods.clear();
    for (const auto& item : detail::split_list(p.raw())) cfg.methods.push_back(p.method(item));
    if (cfg.methods.empty()) p.fail("expected at least one method");
  } else if (key == "inertia") {
    const auto v = p.reals(3);
    try {
      (void)InertiaTensor(v[0], v[1], v[2]);
    } catch (const std::invalid_argument& e) {
      p.fail(e.what());
    }
    cfg.inertia = {v[0], v[1], v[2]};
  } else if (key == "m0") {
    const auto v = p.reals(3);
    cfg.m0 = {v[0], v[1], v[2]};
  } else if (key == "a") {
    cfg.a = p.real();
    if (cfg.a < 0.0) p.fail("noise amplitude must be >= 0");
  } else if (key == "epsilon") {
    cfg.epsilon = p.real();
    if (cfg.epsilon < 0.0) p.fail("epsilon must be >= 0");
  } else if (key == "martingale_mode") {
    if (p.raw() == "full") cfg.martingale_mode = MartingaleMode::Full;
    else if (p.raw() == "symmetric") cfg.martingale_mode = MartingaleMode::Symmetric;
    else p.fail("expected full or symmetric");
  } else if (key == "horizon") {
    cfg.horizon = p.real();
    if (!(cfg.horizon > 0.0)) p.fail("horizon must be > 0");
  } else if (key == "steps") {
    cfg.steps = p.counts();
    if (cfg.steps.empty()) p.fail("expected at least one step count");
  } else if (key == "reference_method") {
    cfg.reference_method = p.method(p.raw());
  } else if (key == "reference_steps") {
    cfg.reference_steps = static_cast<std::size_t>(p.unsigned_int());
    if (cfg.reference_steps == 0) p.fail("reference_steps must be >= 1");
  } else if (key == "paths") {
    cfg.paths = static_cast<std::size_t>(p.unsigned_int());
    if (cfg.paths == 0) p.fail("paths must be >= 1");
  } else if (key == "paths_grid") {
    cfg.paths_grid = p.counts();
    if (cfg.paths_grid.empty()) p.fail("expected at least one path count");
  } else if (key == "seed") {
    cfg.seed = p.unsigned_int();
  } else if (key == "magnus") {
    if (p.raw() == "full_step") cfg.magnus = MagnusVariant::FullStep;
    else if (p.raw() == "half_step") cfg.magnus = MagnusVariant::HalfStep;
    else p.fail("expected full_step or half_step");
  } else if (key == "track_attitude") {
    cfg.track_attitude = p.boolean();
  } else if (key == "record_stride") {
    cfg.record_stride = static_cast<std::size_t>(p.unsigned_int());
    if (cfg.record_stride == 0) p.fail("record_stride must be >= 1");
  } else if (key == "warmup") {
    cfg.warmup = static_cast<int>(p.unsigned_int());
  } else if (key == "repeats") {
    cfg.repeats = static_cast<int>(p.unsigned_int());
    if (cfg.repeats == 0) p.fail("repeats must be >= 1");
  } else if (key == "workers") {
    cfg.workers = static_cast<unsigned>(p.unsigned_int());
  } else if (key == "output") {
    cfg.output = p.raw();
  } else {
    throw ConfigError(key, entry.line, "unknown key");
  }
}

/// Parses the flat configuration format. Keys absent from the text take the
/// defaults of the named experiment.
inline ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, detail::Entry> entries;
  std::vector<std::string> order;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = detail::trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value', got '" + content + "'");
    const std::string key = detail::trim(std::string_view(content).substr(0, eq));
    const std::string value = detail::trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ConfigError("", line_no, "missing key before '='");
    const auto& known = known_config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, line_no, "unknown key");
    if (const auto it = entries.find(key); it != entries.end())
      throw ConfigError(key, line_no,
                        "duplicate key (first defined at line " + std::to_string(it->second.line) + ", again at line " +
                            std::to_string(line_no) + ")");
    entries.emplace(key, detail::Entry{value, line_no});
    order.push_back(key);
  }

  std::vector<std::string> missing;
  for (const auto& k : required_config_keys())
    if (!entries.count(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError(missing.front(), 0, "missing required keys: " + list);
  }

  const auto& exp_entry = entries.at("experiment");
  const auto exp = parse_experiment(exp_entry.value);
  if (!exp) throw ConfigError("experiment", exp_entry.line, "unknown experiment '" + exp_entry.value + "'");
  ExperimentConfig cfg = default_config(*exp);
  for (const auto& key : order) apply_config_value(cfg, key, entries.at(key));
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// The result-determining configuration as ordered (key, value) pairs.
inline std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
  using detail::fmt_double;
  auto join_counts = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (auto x : v) s += (s.empty() ? "" : ", ") + std::to_string(x);
    return s;
  };
  std::string methods;
  for (auto m : c.methods) methods += (methods.empty() ? "" : ", ") + std::string(method_name(m));
  return {
      {"experiment", std::string(experiment_name(c.experiment))},
      {"model", c.model == ModelKind::StochasticTorque ? "stochastic_torque" : "random_inertia"},
      {"methods", methods},
      {"inertia", fmt_double(c.inertia[0]) + ", " + fmt_double(c.inertia[1]) + ", " + fmt_double(c.inertia[2])},
      {"m0", fmt_double(c.m0.x) + ", " + fmt_double(c.m0.y) + ", " + fmt_double(c.m0.z)},
      {"a", fmt_double(c.a)},
      {"epsilon", fmt_double(c.epsilon)},
      {"martingale_mode", c.martingale_mode == MartingaleMode::Full ? "full" : "symmetric"},
      {"horizon", fmt_double(c.horizon)},
      {"steps", join_counts(c.steps)},
      {"reference_method", std::string(method_name(c.reference_method))},
      {"reference_steps", std::to_string(c.reference_steps)},
      {"paths", std::to_string(c.paths)},
      {"paths_grid", join_counts(c.paths_grid)},
      {"seed", std::to_string(c.seed)},
      {"magnus", c.magnus == MagnusVariant::FullStep ? "full_step" : "half_step"},
      {"track_attitude", c.track_attitude ? "true" : "false"},
      {"record_stride", std::to_string(c.record_stride)},
      {"warmup", std::to_string(c.warmup)},
      {"repeats", std::to_string(c.repeats)},
  };
}

/// Echo lines, each prefixed (e.g. with "# " for CSV metadata).
inline std::string render_config(const ExperimentConfig& c, std::string_view prefix = "") {
  std::string out;
  for (const auto& [k, v] : config_echo(c)) out += std::string(prefix) + k + " = " + v + "\n";
  return out;
}

}  // namespace srb
