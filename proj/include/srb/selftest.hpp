#pragma once

// Runtime invariant suites behind the `selftest` and `frb-check` commands.
// Each check measures one quantity and compares it against a fixed bound.

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "srb/config.hpp"
#include "srb/elliptic.hpp"
#include "srb/frb.hpp"
#include "srb/harness.hpp"
#include "srb/integrators.hpp"
#include "srb/linalg3.hpp"
#include "srb/noise.hpp"

namespace srb {

struct CheckResult {
  std::string suite;
  std::string name;
  double value;
  double bound;
  bool passed;
};

namespace detail {

inline CheckResult check_le(std::string suite, std::string name, double value, double bound) {
  return {std::move(suite), std::move(name), value, bound, std::isfinite(value) && value <= bound};
}

/// Random momentum on the unit sphere whose orbit keeps a relative distance
/// of at least `gap` from the separatrix.
inline Vec3 random_regular_momentum(std::mt19937_64& rng, const InertiaTensor& T, double gap) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec3 m{n(rng), n(rng), n(rng)};
    m = m / norm(m);
    const double disc = m.x * m.x * (T.t2() - T.t1()) / T.t1() - m.z * m.z * (T.t3() - T.t2()) / T.t3();
    if (std::fabs(disc) > gap) return m;
  }
}

}  // namespace detail

struct FrbCheckSummary {
  double max_oracle_deviation{0.0};
  double max_group_deviation{0.0};
  std::size_t cases{0};
};

/// frb_flow against frb_oracle on random non-separatrix orbits with h <= 1,
/// plus the group property phi(h1 + h2) = phi(h2) o phi(h1).
inline FrbCheckSummary frb_check(std::size_t cases = 100, long oracle_substeps = 100000, std::uint64_t seed = 7) {
  const InertiaTensor T(0.9144, 1.098, 1.66);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uh(0.0, 1.0);
  FrbCheckSummary s;
  s.cases = cases;
  for (std::size_t i = 0; i < cases; ++i) {
    const Vec3 m = detail::random_regular_momentum(rng, T, 1e-3);
    const double h = uh(rng);
    const double h2 = uh(rng);
    s.max_oracle_deviation = std::fmax(s.max_oracle_deviation, max_abs(frb_flow(m, T, h) - frb_oracle(m, T, h, oracle_substeps)));
    const Vec3 joint = frb_flow(m, T, h + h2);
    const Vec3 composed = frb_flow(frb_flow(m, T, h), T, h2);
    s.max_group_deviation = std::fmax(s.max_group_deviation, max_abs(joint - composed));
  }
  return s;
}

inline std::vector<CheckResult> run_selftest() {
  using detail::check_le;
  std::vector<CheckResult> out;
  const InertiaTensor T(0.9144, 1.098, 1.66);

  // linalg3
  {
    const Mat3 R = mat_exp(Mat3::skew({0.3, -1.2, 0.7}));
    out.push_back(check_le("linalg3", "exp(skew) orthogonal", frobenius_norm(transpose(R) * R - Mat3::identity()), 1e-14));
    out.push_back(check_le("linalg3", "det exp(skew) = 1", std::fabs(determinant(R) - 1.0), 1e-14));
    const Quaternion q = quat_exp_pure({0.15, -0.6, 0.35});
    out.push_back(check_le("linalg3", "unit quaternion from exp", std::fabs(norm(q) - 1.0), 1e-15));
  }

  // elliptic
  {
    double worst = 0.0;
    for (int ki = 0; ki <= 10; ++ki) {
      const double k = ki == 10 ? 0.99 : 0.1 * ki;
      const EllipticModulus mod(k);
      for (int ui = 0; ui <= 400; ++ui) {
        const auto j = jacobi_sn_cn_dn(-20.0 + 0.1 * ui, mod);
        worst = std::fmax(worst, std::fabs(j.sn * j.sn + j.cn * j.cn - 1.0));
        worst = std::fmax(worst, std::fabs(j.dn * j.dn + mod.k2() * j.sn * j.sn - 1.0));
      }
    }
    out.push_back(check_le("elliptic", "sn^2+cn^2 and dn^2+k^2 sn^2", worst, 1e-12));
    out.push_back(check_le("elliptic", "K(0) = pi/2", std::fabs(complete_K(EllipticModulus(0.0)) - std::numbers::pi / 2), 1e-14));
  }

  // frb
  {
    const auto s = frb_check(20, 20000);
    out.push_back(check_le("frb", "exact vs RK4 oracle", s.max_oracle_deviation, 1e-8));
    out.push_back(check_le("frb", "group property", s.max_group_deviation, 1e-11));
    const Vec3 m0{0.4165, 0.9072, 0.0577};
    const auto c0 = conserved(m0, T);
    const auto c1 = conserved(frb_flow(m0, T, 37.0), T);
    out.push_back(check_le("frb", "energy conserved", std::fabs(c1.energy - c0.energy) / c0.energy, 1e-12));
    out.push_back(check_le("frb", "casimir conserved", std::fabs(c1.casimir - c0.casimir) / c0.casimir, 1e-12));
  }

  // noise
  {
    const BrownianPath fine = generate_path(1, 3, 1024, 1.0 / 1024);
    double worst = 0.0;
    for (std::size_t f : {2u, 8u, 64u, 1024u}) worst = std::fmax(worst, std::fabs(coarsen(fine, f).terminal() - fine.terminal()));
    out.push_back(check_le("noise", "coarsened W(T) identical", worst, 0.0));
    const BrownianPath again = generate_path(1, 3, 1024, 1.0 / 1024);
    out.push_back(check_le("noise", "stream reproducible", again.increments == fine.increments ? 0.0 : 1.0, 0.0));
  }

  // integrators
  {
    const ModelParams p(T, 0.1, {0.4165, 0.9072, 0.0577});
    const BrownianPath path = generate_path(5, 0, 200, 0.01);
    StepState s{p.m0};
    double worst = 0.0;
    for (std::size_t n = 0; n < path.size(); ++n) {
      const StepState next = lie_trotter_step(s, p, path.dt, path.increments[n]);
      const double expected = std::exp(p.a * path.increments[n] - 0.5 * p.a * p.a * path.dt);
      worst = std::fmax(worst, std::fabs(norm(next.m) / norm(s.m) / expected - 1.0));
      s = next;
    }
    out.push_back(check_le("integrators", "Lie-Trotter norm identity", worst, 1e-13));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double jac = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 z{u(rng), u(rng), u(rng)};
      const Mat3 A = jacobian_A(z, T);
      const double eps = 1e-6;
      for (std::size_t c = 0; c < 3; ++c) {
        Vec3 dz{};
        dz[c] = eps;
        const Vec3 col = (euler_rhs(z + dz, T) - euler_rhs(z - dz, T)) / (2.0 * eps);
        for (std::size_t r = 0; r < 3; ++r) jac = std::fmax(jac, std::fabs(col[r] - A(r, c)));
      }
    }
    out.push_back(check_le("integrators", "Jacobian vs finite differences", jac, 1e-6));

    Mat3 Ts{};
    Ts.a = {0.1, 0.05, -0.02, 0.05, -0.15, 0.08, -0.02, 0.08, 0.2};
    const Mat3 X = Ts * T.inverse_matrix();
    Ts = (0.5 / frobenius_norm(X)) * Ts;
    out.push_back(check_le("integrators", "Neumann residual at |X| = 0.5", neumann_inverse(T, Ts, 64, 1e-15).residual, 1e-10));

    PerturbedInertia model{T, MartingaleMatrixSpec{1e-3, MartingaleMode::Symmetric, 1}, {0.4165, 0.9072, 0.0577}};
    const InertiaPath ip = generate_inertia_path(model.spec, 400, 0.25);
    IntegrateOptions opt;
    const auto tr = integrate(Method::Midpoint, StepState{model.m0}, model, ip, 400, opt);
    double cas = 0.0;
    for (const auto& st : tr.states) cas = std::fmax(cas, std::fabs(norm(st.m) - norm(model.m0)));
    out.push_back(check_le("integrators", "midpoint Casimir drift", cas, 1e-9));
  }

  // harness
  {
    std::vector<double> hs, e1, e2;
    for (int i = 1; i <= 9; ++i) {
      hs.push_back(std::ldexp(1.0, -i));
      e1.push_back(3.0 * hs.back());
      e2.push_back(3.0 * hs.back() * hs.back());
    }
    out.push_back(check_le("harness", "slope of C h", std::fabs(fit_slope(hs, e1).slope - 1.0), 1e-10));
    out.push_back(check_le("harness", "slope of C h^2", std::fabs(fit_slope(hs, e2).slope - 2.0), 1e-10));
  }

  // config
  {
    for (Experiment e : {Experiment::WeakConvergence, Experiment::ReferenceStudy, Experiment::CpuBenchmark,
                         Experiment::RelativeCost, Experiment::Trajectory, Experiment::EnergyDrift}) {
      const ExperimentConfig c = default_config(e);
      const bool same = parse_config(render_config(c)).same_experiment(c);
      out.push_back(check_le("config", "echo round trip " + std::string(experiment_name(e)), same ? 0.0 : 1.0, 0.0));
    }
  }
  return out;
}

inline bool print_checks(const std::vector<CheckResult>& checks, std::ostream& os) {
  bool ok = true;
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-4s %-12s %-36s value %.3e  bound %.1e\n", c.passed ? "PASS" : "FAIL", c.suite.c_str(),
                  c.name.c_str(), c.value, c.bound);
    os << buf;
    ok = ok && c.passed;
  }
  return ok;
}

}  // namespace srb
