#pragma once

// One-step schemes for the stochastically forced rigid body
//   dm = (m x T^-1 m) dt + a m dW
// and for the free rigid body with randomly perturbed inertia T = Td + Ts,
// plus the driver loop that applies them along a sampled path.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "srb/errors.hpp"
#include "srb/frb.hpp"
#include "srb/linalg3.hpp"
#include "srb/noise.hpp"

namespace srb {

enum class Method { EM, LieTrotter, VoC, FRB, RandomInertiaSplitting, Midpoint };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::EM: return "EM";
    case Method::LieTrotter: return "LieTrotter";
    case Method::VoC: return "VoC";
    case Method::FRB: return "FRB";
    case Method::RandomInertiaSplitting: return "RandomInertiaSplitting";
    case Method::Midpoint: return "Midpoint";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  auto lower = [](std::string_view v) {
    std::string r(v);
    std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return r;
  };
  const std::string key = lower(s);
  for (Method m : {Method::EM, Method::LieTrotter, Method::VoC, Method::FRB, Method::RandomInertiaSplitting, Method::Midpoint})
    if (lower(method_name(m)) == key) return m;
  return std::nullopt;
}

/// Which exponent the half-step fundamental matrix uses in the VoC/Magnus
/// scheme: the full step h (as published) or h/2.
enum class MagnusVariant { FullStep, HalfStep };

struct ModelParams {
  InertiaTensor T;
  double a{0.0};
  Vec3 m0;

  ModelParams(InertiaTensor T_, double a_, Vec3 m0_) : T(T_), a(a_), m0(m0_) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("noise amplitude a must be finite and >= 0");
  }
};

/// Deterministic inertia Td perturbed by epsilon times a matrix martingale.
struct PerturbedInertia {
  InertiaTensor Td;
  MartingaleMatrixSpec spec;
  Vec3 m0;
};

struct StepState {
  Vec3 m;
  Quaternion q{Quaternion::identity()};
  double t{0.0};
};

struct StepOptions {
  bool track_attitude{false};
  MagnusVariant magnus{MagnusVariant::FullStep};
  double midpoint_tol{1e-12};
  int midpoint_max_iter{50};
  int neumann_max_order{64};
  double neumann_tol{1e-15};
};

/// m + h (m x T^-1 m) + a m dW.
inline Vec3 em_step(const Vec3& m, const ModelParams& p, double h, double dW) {
  return m + h * euler_rhs(m, p.T) + (p.a * dW) * m;
}

/// Exact flow of dm = a m dW over a step of length h with increment W_increment.
inline Vec3 gbm_flow(const Vec3& m, double a, double h, double W_increment) {
  return std::exp(a * (W_increment - 0.5 * a * h)) * m;
}

/// q (x) exp(h omega / 2), renormalised.
inline Quaternion attitude_step(const Quaternion& q, const Vec3& omega, double h) {
  return normalize(quat_mul(q, quat_exp_pure((0.5 * h) * omega)));
}

/// Deterministic free-rigid-body flow first, then the exact noise flow.
inline StepState lie_trotter_step(const StepState& s, const ModelParams& p, double h, double dW,
                                  const StepOptions& opt = {}, FrbStatus* status = nullptr) {
  FrbStatus st;
  const Vec3 m1 = frb_flow(s.m, p.T, h, st);
  if (status) *status = st;
  StepState out{gbm_flow(m1, p.a, h, dW), s.q, s.t + h};
  if (opt.track_attitude) out.q = attitude_step(s.q, p.T.angular_velocity(0.5 * (s.m + m1)), h);
  return out;
}

/// Jacobian of f(z) = z x T^-1 z. Zero diagonal.
inline Mat3 jacobian_A(const Vec3& z, const InertiaTensor& T) {
  const double t1 = T.t1(), t2 = T.t2(), t3 = T.t3();
  const double c1 = (t2 - t3) / (t2 * t3);
  const double c2 = (t3 - t1) / (t1 * t3);
  const double c3 = (t1 - t2) / (t2 * t1);
  Mat3 A;
  A.a = {0.0, z.z * c1, z.y * c1, z.z * c2, 0.0, z.x * c2, z.y * c3, z.x * c3, 0.0};
  return A;
}

/// Intermediates of one VoC step, exposed for inspection.
struct VocWorkspace {
  Mat3 Phi{Mat3::identity()};
  Mat3 Phi_half{Mat3::identity()};
  Vec3 y_half;
  Vec3 y_full;
  Vec3 z_half;
};

/// Variation-of-constants step with a second-order Magnus fundamental matrix.
///
/// The fundamental matrix restarts from the identity at every step and y is
/// seeded from the current state:
///   y_half = frb(m, h/2),  y_full = frb(m, h),
///   Phi_half = exp(h A(y_half)),   z_half = y_half + a dW Phi_half m,
///   Phi      = exp(h A(z_half)),   m'     = y_full + a dW Phi m.
/// MagnusVariant::HalfStep uses exp(h/2 A(y_half)) for Phi_half.
inline StepState voc_magnus_step(const StepState& s, const ModelParams& p, double h, double dW, const StepOptions& opt = {},
                                 VocWorkspace* ws = nullptr, FrbStatus* status = nullptr) {
  const FrbOrbit orbit(s.m, p.T);
  if (status) *status = orbit.status();
  VocWorkspace w;
  w.y_half = orbit.at(0.5 * h);
  w.y_full = orbit.at(h);
  const double noise = p.a * dW;
  const double half_exponent = opt.magnus == MagnusVariant::FullStep ? h : 0.5 * h;
  w.Phi_half = mat_exp(half_exponent * jacobian_A(w.y_half, p.T));
  w.z_half = w.y_half + noise * (w.Phi_half * s.m);
  w.Phi = mat_exp(h * jacobian_A(w.z_half, p.T));
  StepState out{w.y_full + noise * (w.Phi * s.m), s.q, s.t + h};
  if (opt.track_attitude) out.q = attitude_step(s.q, p.T.angular_velocity(0.5 * (s.m + out.m)), h);
  if (ws) *ws = w;
  return out;
}

/// Truncated Neumann-series inverse of Td + Ts.
struct NeumannInverse {
  Mat3 Td_inv;
  Mat3 Ts_tilde;
  int truncation_order{0};
  /// |(Td_inv + Ts_tilde)(Td + Ts) - I|_F
  double residual{0.0};

  Mat3 full() const { return Td_inv + Ts_tilde; }
};

/// (Td + Ts)^-1 = Td^-1 (I + X)^-1 with X = Ts Td^-1, expanded as
/// Td^-1 + sum_{k>=1} Td^-1 (-X)^k. Terms are added until one has Frobenius
/// norm below tol or max_order terms have been summed. Requires |X|_F < 1.
inline NeumannInverse neumann_inverse(const InertiaTensor& Td, const Mat3& Ts, int max_order, double tol) {
  NeumannInverse r;
  r.Td_inv = Td.inverse_matrix();
  const Mat3 X = Ts * r.Td_inv;
  const double xnorm = frobenius_norm(X);
  if (!(xnorm < 1.0)) throw NeumannDivergence(xnorm);

  Mat3 power = Mat3::identity();
  const Mat3 minus_X = -1.0 * X;
  for (int k = 1; k <= max_order && xnorm > 0.0; ++k) {
    power = power * minus_X;
    const Mat3 term = r.Td_inv * power;
    r.Ts_tilde += term;
    r.truncation_order = k;
    if (frobenius_norm(term) < tol) break;
  }
  r.residual = frobenius_norm(r.full() * (Td.matrix() + Ts) - Mat3::identity());
  return r;
}

/// Implicit midpoint x' = x + h f((x + x')/2) by fixed-point iteration from
/// an explicit Euler predictor; stops when successive iterates differ by less
/// than tol in the max norm.
template <class VectorField>
Vec3 implicit_midpoint_step(const Vec3& x, VectorField&& f, double h, double tol = 1e-12, int max_iter = 50) {
  Vec3 xn = x + h * f(x);
  double diff = 0.0;
  for (int j = 0; j < max_iter; ++j) {
    const Vec3 next = x + h * f(0.5 * (x + xn));
    diff = max_abs(next - xn);
    xn = next;
    if (diff < tol) return xn;
  }
  throw MidpointNonConvergence(max_iter, diff);
}

/// Lie-Trotter splitting for the perturbed-inertia body: the exact flow of
/// dm/dt = m x Td^-1 m, then one implicit-midpoint substep of
/// dm/dt = m x T~s m with T~s frozen at the value of T_s = eps W_current.
inline StepState random_inertia_splitting_step(const StepState& s, const InertiaTensor& Td, const MartingaleMatrixSpec& spec,
                                               const Mat3& W_current, double h, const StepOptions& opt = {},
                                               FrbStatus* status = nullptr) {
  const NeumannInverse inv = neumann_inverse(Td, spec.epsilon * W_current, opt.neumann_max_order, opt.neumann_tol);
  FrbStatus st;
  const Vec3 m1 = frb_flow(s.m, Td, h, st);
  if (status) *status = st;
  const Mat3& Ts_tilde = inv.Ts_tilde;
  const Vec3 m2 = implicit_midpoint_step(m1, [&](const Vec3& v) { return cross(v, Ts_tilde * v); }, h, opt.midpoint_tol,
                                         opt.midpoint_max_iter);
  StepState out{m2, s.q, s.t + h};
  if (opt.track_attitude) out.q = attitude_step(s.q, inv.full() * (0.5 * (s.m + m2)), h);
  return out;
}

/// Fully implicit midpoint rule on dm/dt = m x (Td + eps W_current)^-1 m.
inline StepState midpoint_inertia_step(const StepState& s, const InertiaTensor& Td, const MartingaleMatrixSpec& spec,
                                       const Mat3& W_current, double h, const StepOptions& opt = {}) {
  const Mat3 Tinv = neumann_inverse(Td, spec.epsilon * W_current, opt.neumann_max_order, opt.neumann_tol).full();
  const Vec3 m = implicit_midpoint_step(s.m, [&](const Vec3& v) { return cross(v, Tinv * v); }, h, opt.midpoint_tol,
                                        opt.midpoint_max_iter);
  StepState out{m, s.q, s.t + h};
  if (opt.track_attitude) out.q = attitude_step(s.q, Tinv * (0.5 * (s.m + m)), h);
  return out;
}

struct IntegrateOptions {
  StepOptions step;
  /// Keep every state; otherwise only the initial and final ones.
  bool record_all{true};
  bool record_energy{false};
  /// On a failing step, return the states so far with `failure` set instead
  /// of throwing.
  bool keep_partial{false};
};

struct Trajectory {
  std::vector<StepState> states;
  /// Energy of each recorded state, when requested.
  std::vector<double> energy;
  long delegated_steps{0};
  /// Set when keep_partial stopped the run early.
  std::optional<IntegrationError> failure;

  const StepState& final_state() const { return states.back(); }
};

namespace detail {

template <class Step, class Energy>
Trajectory drive(Method method, const StepState& s0, std::size_t n_steps, const IntegrateOptions& opt, Step&& step,
                 Energy&& energy_of) {
  Trajectory tr;
  tr.states.reserve(opt.record_all ? n_steps + 1 : 2);
  tr.states.push_back(s0);
  if (opt.record_energy) tr.energy.push_back(energy_of(s0.m, std::size_t{0}));
  StepState s = s0;
  for (std::size_t n = 0; n < n_steps; ++n) {
    FrbStatus st = FrbStatus::Exact;
    std::optional<IntegrationError> err;
    try {
      s = step(s, n, st);
      if (!is_finite(s.m)) err.emplace(std::string(method_name(method)), static_cast<long>(n), "non-finite state");
    } catch (const NumericalError& e) {
      err.emplace(std::string(method_name(method)), static_cast<long>(n), e.what());
    }
    if (err) {
      if (!opt.keep_partial) throw *err;
      tr.failure = std::move(err);
      return tr;
    }
    if (st == FrbStatus::DelegatedNearSeparatrix) ++tr.delegated_steps;
    if (opt.record_all || n + 1 == n_steps) {
      tr.states.push_back(s);
      if (opt.record_energy) tr.energy.push_back(energy_of(s.m, n + 1));
    }
  }
  return tr;
}

}  // namespace detail

/// Applies `method` n_steps times along a Brownian path already coarsened to
/// n_steps increments; the step length is path.dt.
inline Trajectory integrate(Method method, const StepState& s0, const ModelParams& params, const BrownianPath& path,
                            std::size_t n_steps, const IntegrateOptions& opt = {}) {
  if (path.size() != n_steps)
    throw std::invalid_argument("integrate: path has " + std::to_string(path.size()) + " increments, expected " +
                                std::to_string(n_steps));
  const double h = path.dt;
  const Mat3 Tinv = params.T.inverse_matrix();
  auto energy_of = [&](const Vec3& m, std::size_t) { return energy(m, Tinv); };
  const StepOptions& so = opt.step;
  switch (method) {
    case Method::EM:
      return detail::drive(method, s0, n_steps, opt, [&](const StepState& s, std::size_t n, FrbStatus&) {
        StepState out{em_step(s.m, params, h, path.increments[n]), s.q, s.t + h};
        if (so.track_attitude) out.q = attitude_step(s.q, params.T.angular_velocity(0.5 * (s.m + out.m)), h);
        return out;
      }, energy_of);
    case Method::LieTrotter:
      return detail::drive(method, s0, n_steps, opt, [&](const StepState& s, std::size_t n, FrbStatus& st) {
        return lie_trotter_step(s, params, h, path.increments[n], so, &st);
      }, energy_of);
    case Method::VoC:
      return detail::drive(method, s0, n_steps, opt, [&](const StepState& s, std::size_t n, FrbStatus& st) {
        return voc_magnus_step(s, params, h, path.increments[n], so, nullptr, &st);
      }, energy_of);
    case Method::FRB:
      return detail::drive(method, s0, n_steps, opt, [&](const StepState& s, std::size_t, FrbStatus& st) {
        StepState out{frb_flow(s.m, params.T, h, st), s.q, s.t + h};
        if (so.track_attitude) out.q = attitude_step(s.q, params.T.angular_velocity(0.5 * (s.m + out.m)), h);
        return out;
      }, energy_of);
    case Method::RandomInertiaSplitting:
    case Method::Midpoint:
      break;
  }
  throw std::invalid_argument("integrate: method " + std::string(method_name(method)) +
                              " applies to the perturbed-inertia model");
}

/// Energy m^T (Td + eps W)^-1 m / 2 of the perturbed body.
inline double perturbed_energy(const Vec3& m, const InertiaTensor& Td, double epsilon, const Mat3& W) {
  return energy(m, inverse(Td.matrix() + epsilon * W));
}

/// Applies `method` along a matrix martingale sampled at n_steps + 1 times.
/// FRB ignores the perturbation and flows with Td alone.
inline Trajectory integrate(Method method, const StepState& s0, const PerturbedInertia& model, const InertiaPath& path,
                            std::size_t n_steps, const IntegrateOptions& opt = {}) {
  if (path.steps() != n_steps)
    throw std::invalid_argument("integrate: inertia path has " + std::to_string(path.steps()) + " steps, expected " +
                                std::to_string(n_steps));
  const double h = path.dt;
  auto energy_of = [&](const Vec3& m, std::size_t n) {
    return perturbed_energy(m, model.Td, model.spec.epsilon, path.values[n]);
  };
  const StepOptions& so = opt.step;
  switch (method) {
    case Method::RandomInertiaSplitting:
      return detail::drive(method, s0, n_steps, opt, [&](const StepState& s, std::size_t n, FrbStatus& st) {
        return random_inertia_splitting_step(s, model.Td, model.spec, path.values[n], h, so, &st);
      }, energy_of);
    case Method::Midpoint:
      return detail::drive(method, s0, n_steps, opt, [&](const StepState& s, std::size_t n, FrbStatus&) {
        return midpoint_inertia_step(s, model.Td, model.spec, path.values[n], h, so);
      }, energy_of);
    case Method::FRB:
      return detail::drive(method, s0, n_steps, opt, [&](const StepState& s, std::size_t, FrbStatus& st) {
        StepState out{frb_flow(s.m, model.Td, h, st), s.q, s.t + h};
        if (so.track_attitude) out.q = attitude_step(s.q, model.Td.angular_velocity(0.5 * (s.m + out.m)), h);
        return out;
      }, energy_of);
    case Method::EM:
    case Method::LieTrotter:
    case Method::VoC:
      break;
  }
  throw std::invalid_argument("integrate: method " + std::string(method_name(method)) +
                              " applies to the stochastic-torque model");
}

}  // namespace srb
