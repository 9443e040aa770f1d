#pragma once

// Seeded Monte-Carlo experiments: weak convergence, reference-solution
// sampling error, CPU cost, single-path trajectories and energy drift under
// random inertia. Each runner returns an ExperimentReport that serialises to
// CSV with the configuration echoed as leading '#' lines.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srb/config.hpp"
#include "srb/integrators.hpp"
#include "srb/noise.hpp"

namespace srb {

// ---------------------------------------------------------------------------
// Slope fitting

struct SlopeFit {
  double slope{0.0};
  double intercept{0.0};
  /// RMS residual of the fit in natural-log units.
  double residual{0.0};
  std::size_t used{0};
  std::size_t excluded{0};
  bool degenerate{false};
};

inline constexpr double kSlopeFloor = 1e-12;

/// Least squares on (log h, log err). Errors below kSlopeFloor (and non-finite
/// ones) are excluded and counted.
inline SlopeFit fit_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  if (hs.size() != errs.size()) throw std::invalid_argument("fit_slope: size mismatch");
  if (hs.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 points");
  SlopeFit f;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0)) throw std::invalid_argument("fit_slope: step sizes must be positive");
    if (!(errs[i] >= kSlopeFloor) || !std::isfinite(errs[i])) {
      ++f.excluded;
      continue;
    }
    x.push_back(std::log(hs[i]));
    y.push_back(std::log(errs[i]));
  }
  f.used = x.size();
  if (f.used < 2)
    throw std::invalid_argument("fit_slope: fewer than 2 usable points (" + std::to_string(f.excluded) +
                                " below the floor)");
  const double n = static_cast<double>(f.used);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < f.used; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < f.used; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < f.used; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

/// fit_slope, or a fit flagged degenerate when too few points are usable.
inline SlopeFit try_fit_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  try {
    return fit_slope(hs, errs);
  } catch (const std::invalid_argument&) {
    SlopeFit f;
    f.degenerate = true;
    f.slope = std::nan("");
    f.intercept = std::nan("");
    f.residual = std::nan("");
    for (double e : errs) (e >= kSlopeFloor && std::isfinite(e)) ? ++f.used : ++f.excluded;
    return f;
  }
}

/// Ordinary least-squares line y = intercept + slope x.
struct LineFit {
  double slope{0.0};
  double intercept{0.0};
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

inline double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// Report

struct Diagnostic {
  Method method;
  double h;
  long path;
  long step;
  std::string message;
};

struct WeakErrorRow {
  Method method;
  double h;
  std::size_t n_steps;
  std::size_t paths;
  Vec3 err;
  double err_norm;
  bool failed{false};
};

struct ReferenceRow {
  std::size_t paths;
  Vec3 err;
  double err_norm;
  /// sqrt(trace(Cov m) (1/S - 1/S_ref)), the expected size of err_norm.
  double std_error;
};

struct BenchmarkRow {
  Method method;
  double h;
  std::size_t n_steps;
  double wall_time_s;
  double err_norm;
  double cost_ratio;
};

struct TrajectoryRow {
  Method method;
  double t;
  Vec3 m;
  double m_norm;
  double energy;
};

struct EnergyRow {
  Method method;
  double t;
  /// Path average of |H_n - H_0|.
  double energy_error;
  /// Path maximum of | |m_n| - |m_0| |.
  double casimir_error;
};

struct DriftSummary {
  double slope;
  double stddev;
  double max_energy_error;
  double max_casimir_error;
  bool finite;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string timestamp;
  std::vector<WeakErrorRow> weak;
  std::vector<ReferenceRow> reference;
  std::vector<BenchmarkRow> benchmark;
  std::vector<TrajectoryRow> trajectory;
  std::vector<EnergyRow> energy;
  std::map<Method, SlopeFit> slopes;
  std::map<Method, DriftSummary> drift;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Parallel map over paths

inline unsigned effective_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls body(i) for i in [0, n) on `workers` threads. Each index is handled
/// exactly once; callers write into per-index slots and reduce afterwards in
/// index order, so results do not depend on the worker count.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Shared Monte-Carlo machinery

namespace detail {

struct Cell {
  Method method;
  std::size_t n_steps;
};

struct CellOutcome {
  Vec3 m;
  bool failed{false};
  long step{-1};
  std::string message;
};

inline void require_divides(std::size_t fine, std::size_t n) {
  if (fine % n != 0)
    throw ConfigError("steps", 0, "step count " + std::to_string(n) + " does not divide the finest resolution " +
                                      std::to_string(fine));
}

inline void require_model(const ExperimentConfig& cfg, Method m) {
  const bool inertia_method = m == Method::RandomInertiaSplitting || m == Method::Midpoint;
  const bool torque_method = m == Method::EM || m == Method::LieTrotter || m == Method::VoC;
  if ((cfg.model == ModelKind::StochasticTorque && inertia_method) || (cfg.model == ModelKind::RandomInertia && torque_method))
    throw ConfigError("methods", 0,
                      "method " + std::string(method_name(m)) + " does not apply to model " +
                          (cfg.model == ModelKind::StochasticTorque ? "stochastic_torque" : "random_inertia"));
}

/// Terminal momentum of every cell on one Monte-Carlo path, all cells driven
/// by coarsenings of the same fine path.
class PathSimulator {
 public:
  PathSimulator(const ExperimentConfig& cfg, std::size_t n_fine) : cfg_(cfg), n_fine_(n_fine) {}

  void simulate(std::size_t path_index, const std::vector<Cell>& cells, std::vector<CellOutcome>& out) const {
    out.assign(cells.size(), {});
    IntegrateOptions opt;
    opt.record_all = false;
    opt.step = cfg_.step_options();
    const double dt = cfg_.horizon / static_cast<double>(n_fine_);
    const StepState s0{cfg_.m0};
    if (cfg_.model == ModelKind::StochasticTorque) {
      const ModelParams params = cfg_.model_params();
      const BrownianPath fine = generate_path(cfg_.seed, path_index, n_fine_, dt);
      for (std::size_t c = 0; c < cells.size(); ++c) {
        run_cell(out[c], [&] {
          const BrownianPath coarse = coarsen(fine, n_fine_ / cells[c].n_steps);
          return integrate(cells[c].method, s0, params, coarse, cells[c].n_steps, opt).final_state().m;
        });
      }
    } else {
      PerturbedInertia model = cfg_.perturbed_inertia();
      model.spec = model.spec.for_path(path_index);
      const InertiaPath fine = generate_inertia_path(model.spec, n_fine_, dt);
      for (std::size_t c = 0; c < cells.size(); ++c) {
        run_cell(out[c], [&] {
          const InertiaPath coarse = coarsen(fine, n_fine_ / cells[c].n_steps);
          return integrate(cells[c].method, s0, model, coarse, cells[c].n_steps, opt).final_state().m;
        });
      }
    }
  }

 private:
  template <class F>
  static void run_cell(CellOutcome& o, F&& f) {
    try {
      o.m = f();
    } catch (const IntegrationError& e) {
      o.failed = true;
      o.step = e.step();
      o.message = e.cause();
    } catch (const NumericalError& e) {
      o.failed = true;
      o.message = e.what();
    }
  }

  const ExperimentConfig& cfg_;
  std::size_t n_fine_;
};

/// Ensemble means per cell over paths [0, S), reduced in path order. Failed
/// cells are reported through `diag`.
inline std::vector<std::optional<Vec3>> ensemble_means(const std::vector<std::vector<CellOutcome>>& results,
                                                       const std::vector<Cell>& cells, std::size_t S, double horizon,
                                                       std::vector<Diagnostic>* diag) {
  std::vector<std::optional<Vec3>> means(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    Vec3 sum{};
    bool failed = false;
    for (std::size_t p = 0; p < S; ++p) {
      const auto& o = results[p][c];
      if (o.failed) {
        if (diag)
          diag->push_back({cells[c].method, horizon / static_cast<double>(cells[c].n_steps), static_cast<long>(p), o.step,
                           o.message});
        failed = true;
        break;
      }
      sum += o.m;
    }
    if (!failed) means[c] = sum / static_cast<double>(S);
  }
  return means;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

/// Weak error |E m_h(T) - E m_ref(T)| per (method, h) against the reference
/// method at reference_steps, all on common fine paths.
inline ExperimentReport run_weak_convergence(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::WeakConvergence)
    throw ConfigError("experiment", 0, "run_weak_convergence needs experiment = weak_convergence");
  if (cfg.steps.empty()) throw ConfigError("steps", 0, "empty step grid");
  for (auto m : cfg.methods) detail::require_model(cfg, m);
  detail::require_model(cfg, cfg.reference_method);

  const std::size_t n_fine = std::max(cfg.reference_steps, *std::max_element(cfg.steps.begin(), cfg.steps.end()));
  std::vector<detail::Cell> cells{{cfg.reference_method, cfg.reference_steps}};
  for (auto m : cfg.methods)
    for (auto n : cfg.steps) cells.push_back({m, n});
  for (const auto& c : cells) detail::require_divides(n_fine, c.n_steps);

  ExperimentReport rep;
  rep.config = cfg;
  rep.timestamp = utc_timestamp();

  std::vector<std::vector<detail::CellOutcome>> results(cfg.paths);
  const detail::PathSimulator sim(cfg, n_fine);
  parallel_for(cfg.paths, effective_workers(cfg.workers), [&](std::size_t p) { sim.simulate(p, cells, results[p]); });

  const auto means = detail::ensemble_means(results, cells, cfg.paths, cfg.horizon, &rep.diagnostics);
  const double nan = std::nan("");
  std::size_t c = 1;
  for (auto m : cfg.methods) {
    std::vector<double> hs, errs;
    for (auto n : cfg.steps) {
      WeakErrorRow row{m, cfg.horizon / static_cast<double>(n), n, cfg.paths, {nan, nan, nan}, nan};
      if (means[0] && means[c]) {
        row.err = *means[c] - *means[0];
        row.err_norm = norm(row.err);
        hs.push_back(row.h);
        errs.push_back(row.err_norm);
      } else {
        row.failed = true;
      }
      rep.weak.push_back(row);
      ++c;
    }
    if (hs.size() >= 3) rep.slopes[m] = try_fit_slope(hs, errs);
    else rep.slopes[m] = SlopeFit{nan, nan, nan, 0, hs.size(), true};
  }
  return rep;
}

/// Error of the first-S-path ensemble mean against the mean over the largest
/// S in paths_grid, for the reference method at reference_steps.
inline ExperimentReport run_reference_study(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::ReferenceStudy)
    throw ConfigError("experiment", 0, "run_reference_study needs experiment = reference_study");
  if (cfg.paths_grid.empty()) throw ConfigError("paths_grid", 0, "empty paths grid");
  detail::require_model(cfg, cfg.reference_method);

  ExperimentReport rep;
  rep.config = cfg;
  rep.timestamp = utc_timestamp();
  const std::size_t s_ref = *std::max_element(cfg.paths_grid.begin(), cfg.paths_grid.end());
  const std::vector<detail::Cell> cells{{cfg.reference_method, cfg.reference_steps}};

  std::vector<std::vector<detail::CellOutcome>> results(s_ref);
  const detail::PathSimulator sim(cfg, cfg.reference_steps);
  parallel_for(s_ref, effective_workers(cfg.workers), [&](std::size_t p) { sim.simulate(p, cells, results[p]); });

  const auto ref = detail::ensemble_means(results, cells, s_ref, cfg.horizon, &rep.diagnostics)[0];
  if (!ref) return rep;
  double var = 0.0;
  for (std::size_t p = 0; p < s_ref; ++p) {
    const Vec3 d = results[p][0].m - *ref;
    var += dot(d, d);
  }
  var /= static_cast<double>(s_ref > 1 ? s_ref - 1 : 1);

  for (std::size_t S : cfg.paths_grid) {
    const Vec3 mean = *detail::ensemble_means(results, cells, S, cfg.horizon, nullptr)[0];
    const Vec3 err = mean - *ref;
    const double se = std::sqrt(var * std::max(0.0, 1.0 / static_cast<double>(S) - 1.0 / static_cast<double>(s_ref)));
    rep.reference.push_back({S, err, norm(err), se});
  }
  return rep;
}

/// Wall time of the stepping loops per (method, h) over all paths, single
/// threaded, median of `repeats` runs after `warmup` untimed runs. Path
/// generation and coarsening happen before timing.
inline ExperimentReport run_cpu_benchmark(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::CpuBenchmark && cfg.experiment != Experiment::RelativeCost)
    throw ConfigError("experiment", 0, "run_cpu_benchmark needs experiment = cpu_benchmark or relative_cost");
  if (cfg.steps.empty() || cfg.methods.empty()) throw ConfigError("steps", 0, "empty step grid or method list");
  if (cfg.model != ModelKind::StochasticTorque) throw ConfigError("model", 0, "benchmark runs the stochastic_torque model");
  for (auto m : cfg.methods) detail::require_model(cfg, m);
  detail::require_model(cfg, cfg.reference_method);

  ExperimentReport rep;
  rep.config = cfg;
  rep.timestamp = utc_timestamp();
  const std::size_t n_fine = std::max(cfg.reference_steps, *std::max_element(cfg.steps.begin(), cfg.steps.end()));
  for (auto n : cfg.steps) detail::require_divides(n_fine, n);
  detail::require_divides(n_fine, cfg.reference_steps);

  const ModelParams params = cfg.model_params();
  const double dt = cfg.horizon / static_cast<double>(n_fine);
  std::vector<BrownianPath> fine(cfg.paths);
  for (std::size_t p = 0; p < cfg.paths; ++p) fine[p] = generate_path(cfg.seed, p, n_fine, dt);

  IntegrateOptions opt;
  opt.record_all = false;
  opt.step = cfg.step_options();
  const StepState s0{cfg.m0};

  Vec3 ref{};
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    const auto coarse = coarsen(fine[p], n_fine / cfg.reference_steps);
    ref += integrate(cfg.reference_method, s0, params, coarse, cfg.reference_steps, opt).final_state().m;
  }
  ref = ref / static_cast<double>(cfg.paths);

  for (auto n : cfg.steps) {
    std::vector<BrownianPath> coarse(cfg.paths);
    for (std::size_t p = 0; p < cfg.paths; ++p) coarse[p] = coarsen(fine[p], n_fine / n);
    std::vector<BenchmarkRow> rows;
    for (auto m : cfg.methods) {
      Vec3 sum{};
      bool failed = false;
      auto sweep = [&](bool accumulate) {
        Vec3 s{};
        for (std::size_t p = 0; p < cfg.paths && !failed; ++p) {
          try {
            s += integrate(m, s0, params, coarse[p], n, opt).final_state().m;
          } catch (const IntegrationError& e) {
            if (accumulate)
              rep.diagnostics.push_back({m, cfg.horizon / static_cast<double>(n), static_cast<long>(p), e.step(), e.cause()});
            failed = true;
          }
        }
        if (accumulate) sum = s;
      };
      for (int w = 0; w < cfg.warmup; ++w) sweep(false);
      failed = false;
      std::vector<double> times;
      for (int r = 0; r < cfg.repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        sweep(r == 0);
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      std::sort(times.begin(), times.end());
      const double median = times[times.size() / 2];
      const double err = failed ? std::nan("") : norm(sum / static_cast<double>(cfg.paths) - ref);
      rows.push_back({m, cfg.horizon / static_cast<double>(n), n, median, err, 0.0});
    }
    double cheapest = rows.front().wall_time_s;
    for (const auto& r : rows) cheapest = std::min(cheapest, r.wall_time_s);
    for (auto& r : rows) {
      r.cost_ratio = r.wall_time_s / cheapest;
      rep.benchmark.push_back(r);
    }
  }
  return rep;
}

/// Single-path trajectories (path index 0) for every configured method, every
/// record_stride-th step.
inline ExperimentReport run_trajectory(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::Trajectory) throw ConfigError("experiment", 0, "run_trajectory needs experiment = trajectory");
  if (cfg.steps.empty()) throw ConfigError("steps", 0, "trajectory needs a step count");
  for (auto m : cfg.methods) detail::require_model(cfg, m);

  ExperimentReport rep;
  rep.config = cfg;
  rep.timestamp = utc_timestamp();
  const std::size_t n = cfg.steps.front();
  const double h = cfg.horizon / static_cast<double>(n);
  IntegrateOptions opt;
  opt.record_all = true;
  opt.record_energy = true;
  opt.step = cfg.step_options();
  const StepState s0{cfg.m0};

  opt.keep_partial = true;
  for (auto m : cfg.methods) {
    Trajectory tr;
    if (cfg.model == ModelKind::StochasticTorque) {
      tr = integrate(m, s0, cfg.model_params(), generate_path(cfg.seed, 0, n, h), n, opt);
    } else {
      PerturbedInertia model = cfg.perturbed_inertia();
      model.spec = model.spec.for_path(0);
      tr = integrate(m, s0, model, generate_inertia_path(model.spec, n, h), n, opt);
    }
    // A diverging method keeps the rows computed before the failure.
    if (tr.failure) rep.diagnostics.push_back({m, h, 0, tr.failure->step(), tr.failure->cause()});
    for (std::size_t i = 0; i < tr.states.size(); i += cfg.record_stride) {
      const auto& s = tr.states[i];
      rep.trajectory.push_back({m, static_cast<double>(i) * h, s.m, norm(s.m), tr.energy[i]});
    }
  }
  return rep;
}

/// Path-averaged energy error |H_n - H_0| with H = m^T (Td + eps W_n)^-1 m / 2
/// under random inertia, plus the Casimir deviation and a drift regression.
inline ExperimentReport run_energy_drift(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::EnergyDrift) throw ConfigError("experiment", 0, "run_energy_drift needs experiment = energy_drift");
  if (cfg.model != ModelKind::RandomInertia) throw ConfigError("model", 0, "energy_drift needs model = random_inertia");
  if (cfg.steps.empty()) throw ConfigError("steps", 0, "energy_drift needs a step count");
  for (auto m : cfg.methods) detail::require_model(cfg, m);

  ExperimentReport rep;
  rep.config = cfg;
  rep.timestamp = utc_timestamp();
  const std::size_t n = cfg.steps.front();
  const double h = cfg.horizon / static_cast<double>(n);
  IntegrateOptions opt;
  opt.record_all = true;
  opt.record_energy = true;
  opt.step = cfg.step_options();
  const StepState s0{cfg.m0};

  struct PathResult {
    std::vector<double> energy_error;
    std::vector<double> casimir_error;
    std::optional<Diagnostic> failure;
  };

  for (auto m : cfg.methods) {
    std::vector<PathResult> results(cfg.paths);
    parallel_for(cfg.paths, effective_workers(cfg.workers), [&](std::size_t p) {
      PerturbedInertia model = cfg.perturbed_inertia();
      model.spec = model.spec.for_path(p);
      try {
        const auto tr = integrate(m, s0, model, generate_inertia_path(model.spec, n, h), n, opt);
        auto& r = results[p];
        const double m0n = norm(tr.states.front().m);
        for (std::size_t i = 0; i < tr.states.size(); ++i) {
          r.energy_error.push_back(std::fabs(tr.energy[i] - tr.energy.front()));
          r.casimir_error.push_back(std::fabs(norm(tr.states[i].m) - m0n));
        }
      } catch (const IntegrationError& e) {
        results[p].failure = Diagnostic{m, h, static_cast<long>(p), e.step(), e.cause()};
      }
    });

    bool failed = false;
    for (const auto& r : results)
      if (r.failure) {
        rep.diagnostics.push_back(*r.failure);
        failed = true;
        break;
      }
    if (failed) continue;

    std::vector<double> ts, avg;
    double max_cas = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      double e = 0.0, c = 0.0;
      for (const auto& r : results) {
        e += r.energy_error[i];
        c = std::max(c, r.casimir_error[i]);
      }
      e /= static_cast<double>(cfg.paths);
      ts.push_back(static_cast<double>(i) * h);
      avg.push_back(e);
      max_cas = std::max(max_cas, c);
      rep.energy.push_back({m, ts.back(), e, c});
    }
    const auto line = fit_line(ts, avg);
    bool finite = true;
    for (double e : avg) finite = finite && std::isfinite(e);
    rep.drift[m] = {line.slope, sample_stddev(avg), *std::max_element(avg.begin(), avg.end()), max_cas, finite};
  }
  return rep;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::WeakConvergence: return run_weak_convergence(cfg);
    case Experiment::ReferenceStudy: return run_reference_study(cfg);
    case Experiment::CpuBenchmark:
    case Experiment::RelativeCost: return run_cpu_benchmark(cfg);
    case Experiment::Trajectory: return run_trajectory(cfg);
    case Experiment::EnergyDrift: return run_energy_drift(cfg);
  }
  throw ConfigError("experiment", 0, "unsupported experiment");
}

// ---------------------------------------------------------------------------
// CSV output

namespace detail {
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace detail

inline constexpr std::string_view kWeakHeader = "method,h,n_steps,paths,err_norm,err_m1,err_m2,err_m3";
inline constexpr std::string_view kTrajectoryHeader = "method,t,m1,m2,m3,m_norm,energy";
inline constexpr std::string_view kBenchmarkHeader = "method,h,wall_time_s,err_norm,cost_ratio";
inline constexpr std::string_view kReferenceHeader = "paths,err_norm,err_m1,err_m2,err_m3,std_error";
inline constexpr std::string_view kEnergyHeader = "method,t,energy_error,casimir_error";

inline constexpr std::string_view kTimestampKey = "# generated = ";

/// Writes the metadata block, the schema header and one row per result.
inline void write_csv(const ExperimentReport& rep, std::ostream& os) {
  using detail::num;
  os << kTimestampKey << rep.timestamp << '\n';
  os << render_config(rep.config, "# ");
  auto name = [](Method m) { return std::string(method_name(m)); };
  switch (rep.config.experiment) {
    case Experiment::WeakConvergence:
      os << kWeakHeader << '\n';
      for (const auto& r : rep.weak)
        os << name(r.method) << ',' << num(r.h) << ',' << r.n_steps << ',' << r.paths << ',' << num(r.err_norm) << ','
           << num(r.err.x) << ',' << num(r.err.y) << ',' << num(r.err.z) << '\n';
      break;
    case Experiment::ReferenceStudy:
      os << kReferenceHeader << '\n';
      for (const auto& r : rep.reference)
        os << r.paths << ',' << num(r.err_norm) << ',' << num(r.err.x) << ',' << num(r.err.y) << ',' << num(r.err.z) << ','
           << num(r.std_error) << '\n';
      break;
    case Experiment::CpuBenchmark:
    case Experiment::RelativeCost:
      os << kBenchmarkHeader << '\n';
      for (const auto& r : rep.benchmark)
        os << name(r.method) << ',' << num(r.h) << ',' << num(r.wall_time_s) << ',' << num(r.err_norm) << ','
           << num(r.cost_ratio) << '\n';
      break;
    case Experiment::Trajectory:
      os << kTrajectoryHeader << '\n';
      for (const auto& r : rep.trajectory)
        os << name(r.method) << ',' << num(r.t) << ',' << num(r.m.x) << ',' << num(r.m.y) << ',' << num(r.m.z) << ','
           << num(r.m_norm) << ',' << num(r.energy) << '\n';
      break;
    case Experiment::EnergyDrift:
      os << kEnergyHeader << '\n';
      for (const auto& r : rep.energy)
        os << name(r.method) << ',' << num(r.t) << ',' << num(r.energy_error) << ',' << num(r.casimir_error) << '\n';
      break;
  }
}

inline std::string to_csv(const ExperimentReport& rep) {
  std::ostringstream ss;
  write_csv(rep, ss);
  return ss.str();
}

/// Recovers the configuration echoed in a CSV written by write_csv.
inline ExperimentConfig config_from_csv(std::string_view csv) {
  std::string text;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto nl = csv.find('\n', pos);
    const std::string_view line = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    if (line.rfind("# ", 0) != 0) break;
    if (line.rfind(kTimestampKey, 0) == 0) continue;
    text += std::string(line.substr(2)) + "\n";
  }
  return parse_config(text);
}

/// Human-readable summary with the acceptance bands relevant to each experiment.
inline void print_summary(const ExperimentReport& rep, std::ostream& os) {
  const auto& cfg = rep.config;
  os << "experiment " << experiment_name(cfg.experiment) << " (seed " << cfg.seed << ", paths " << cfg.paths << ")\n";
  char buf[256];
  switch (cfg.experiment) {
    case Experiment::WeakConvergence:
      for (const auto& [m, f] : rep.slopes) {
        if (f.degenerate) {
          std::snprintf(buf, sizeof buf, "  %-24s slope: degenerate (%zu points at the %g floor)\n",
                        std::string(method_name(m)).c_str(), f.excluded, kSlopeFloor);
        } else {
          const bool in_band = f.slope >= 0.8 && f.slope <= 1.2;
          std::snprintf(buf, sizeof buf, "  %-24s slope %.4f (residual %.3g, %zu points)  weak order one [0.8,1.2]: %s\n",
                        std::string(method_name(m)).c_str(), f.slope, f.residual, f.used, in_band ? "PASS" : "FAIL");
        }
        os << buf;
      }
      break;
    case Experiment::ReferenceStudy:
      for (const auto& r : rep.reference) {
        std::snprintf(buf, sizeof buf, "  S = %-8zu error %.3e  (Monte-Carlo std error %.3e)\n", r.paths, r.err_norm, r.std_error);
        os << buf;
      }
      break;
    case Experiment::CpuBenchmark:
    case Experiment::RelativeCost:
      for (const auto& r : rep.benchmark) {
        std::snprintf(buf, sizeof buf, "  %-12s h = %-10.6g time %.4e s  cost ratio %.3f  error %.3e\n",
                      std::string(method_name(r.method)).c_str(), r.h, r.wall_time_s, r.cost_ratio, r.err_norm);
        os << buf;
      }
      break;
    case Experiment::Trajectory:
      os << "  " << rep.trajectory.size() << " rows\n";
      break;
    case Experiment::EnergyDrift:
      for (const auto& [m, d] : rep.drift) {
        const bool no_trend = std::fabs(d.slope) < d.stddev;
        std::snprintf(buf, sizeof buf,
                      "  %-24s drift slope %.3e  series std %.3e  max |H-H0| %.3e  max casimir dev %.3e  no secular trend: %s\n",
                      std::string(method_name(m)).c_str(), d.slope, d.stddev, d.max_energy_error, d.max_casimir_error,
                      no_trend && d.finite ? "PASS" : "FAIL");
        os << buf;
      }
      break;
  }
  for (const auto& d : rep.diagnostics) {
    std::snprintf(buf, sizeof buf, "  failure: method %s, h %g, path %ld, step %ld: %s\n", std::string(method_name(d.method)).c_str(),
                  d.h, d.path, d.step, d.message.c_str());
    os << buf;
  }
}

}  // namespace srb
