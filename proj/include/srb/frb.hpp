#pragma once

// Exact flow of the free rigid body  dm/dt = m x T^-1 m  in Jacobi elliptic
// functions, with a classical RK4 integrator used as an independent oracle and
// as the fallback on near-separatrix orbits.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "srb/elliptic.hpp"
#include "srb/errors.hpp"
#include "srb/linalg3.hpp"

namespace srb {

/// Principal moments of inertia, strictly ascending.
class InertiaTensor {
 public:
  InertiaTensor(double t1, double t2, double t3) : t1_(t1), t2_(t2), t3_(t3) {
    if (!(std::isfinite(t1) && std::isfinite(t2) && std::isfinite(t3)) || !(t1 > 0.0))
      throw std::invalid_argument("inertia moments must be finite and positive");
    if (!(t2 - t1 >= kMinRelativeGap * t2) || !(t3 - t2 >= kMinRelativeGap * t3))
      throw std::invalid_argument("inertia moments must be pairwise distinct and ascending (t1 < t2 < t3)");
  }

  double t1() const { return t1_; }
  double t2() const { return t2_; }
  double t3() const { return t3_; }
  double operator[](std::size_t i) const { return i == 0 ? t1_ : (i == 1 ? t2_ : t3_); }

  Mat3 matrix() const { return Mat3::diag(t1_, t2_, t3_); }
  Mat3 inverse_matrix() const { return Mat3::diag(1.0 / t1_, 1.0 / t2_, 1.0 / t3_); }
  Vec3 angular_velocity(const Vec3& m) const { return {m.x / t1_, m.y / t2_, m.z / t3_}; }

  static constexpr double kMinRelativeGap = 1e-12;

 private:
  double t1_;
  double t2_;
  double t3_;
};

struct FrbConserved {
  double casimir;  // |m|^2
  double energy;   // m^T T^-1 m / 2
};

/// m^T Tinv m / 2.
inline double energy(const Vec3& m, const Mat3& Tinv) { return 0.5 * dot(m, Tinv * m); }

inline FrbConserved conserved(const Vec3& m, const InertiaTensor& T) {
  return {dot(m, m), 0.5 * dot(m, T.angular_velocity(m))};
}

inline Vec3 euler_rhs(const Vec3& m, const InertiaTensor& T) { return cross(m, T.angular_velocity(m)); }

/// n_sub classical RK4 steps over [0, h]. Global error O((h/n_sub)^4).
inline Vec3 frb_oracle(const Vec3& m0, const InertiaTensor& T, double h, long n_sub) {
  if (n_sub < 1) throw std::invalid_argument("frb_oracle: n_sub must be >= 1");
  if (!is_finite(m0) || !std::isfinite(h)) throw std::invalid_argument("frb_oracle: non-finite input");
  const double dt = h / static_cast<double>(n_sub);
  Vec3 m = m0;
  for (long i = 0; i < n_sub; ++i) {
    const Vec3 k1 = euler_rhs(m, T);
    const Vec3 k2 = euler_rhs(m + (0.5 * dt) * k1, T);
    const Vec3 k3 = euler_rhs(m + (0.5 * dt) * k2, T);
    const Vec3 k4 = euler_rhs(m + dt * k3, T);
    m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return m;
}

enum class FrbStatus {
  Exact,                    // elliptic-function solution
  Equilibrium,              // m0 on a stable principal axis (or zero)
  DelegatedNearSeparatrix,  // |2H t2 - |m|^2| below threshold; RK4 fallback
};

/// Orbit constants of one free-rigid-body solution, built once from m0 and
/// evaluated at arbitrary times.
///
/// With C = |m|^2 and 2H = sum m_i^2/t_i the sign of D = 2H t2 - C selects the
/// regime: D > 0 rotates about axis 1, D < 0 about axis 3. In the axis-3
/// regime
///   m1 = s a1 cn(tau), m2 = a2 sn(tau), m3 = s a3 dn(tau),  tau = lambda t + u0,
/// and in the axis-1 regime the roles of components 1 and 3 swap between cn
/// and dn; s is the (constant) sign of the non-vanishing component. The phase
/// u0 is recovered from m0 by a safeguarded Newton solve on the amplitude and
/// the reconstruction at t = 0 is checked against m0.
class FrbOrbit {
 public:
  /// Orbits with |D| < kSeparatrixThreshold * C are delegated.
  static constexpr double kSeparatrixThreshold = 1e-9;
  /// Substep length of the RK4 fallback.
  static constexpr double kDelegatedStep = 1e-3;
  static constexpr double kPhaseTolerance = 1e-13;

  FrbOrbit(const Vec3& m0, const InertiaTensor& T) : m0_(m0), T_(T), modulus_(0.0) {
    if (!is_finite(m0)) throw std::invalid_argument("frb_flow: non-finite initial momentum");
    const double t1 = T.t1(), t2 = T.t2(), t3 = T.t3();
    const double m1s = m0.x * m0.x, m2s = m0.y * m0.y, m3s = m0.z * m0.z;
    const double casimir = m1s + m2s + m3s;
    if (casimir == 0.0) {
      status_ = FrbStatus::Equilibrium;
      return;
    }
    const double disc = m1s * (t2 - t1) / t1 - m3s * (t3 - t2) / t3;
    if (std::fabs(disc) < kSeparatrixThreshold * casimir) {
      status_ = FrbStatus::DelegatedNearSeparatrix;
      return;
    }

    const double d13 = (t3 - t1) / (t1 * t3);
    const double beta1 = t1 * (t3 - t2) / (t2 * (t3 - t1));
    const double beta3 = t3 * (t2 - t1) / (t2 * (t3 - t1));
    const double alpha1 = m1s + beta1 * m2s;
    const double alpha3 = m3s + beta3 * m2s;

    axis_one_ = disc > 0.0;
    double kc2 = 0.0, phi0 = 0.0;
    if (axis_one_) {
      sign_ = m0.x >= 0.0 ? 1.0 : -1.0;
      if (alpha3 == 0.0) {
        status_ = FrbStatus::Equilibrium;
        return;
      }
      amp1_ = std::sqrt(alpha1);
      amp2_ = std::sqrt(alpha3 / beta3);
      amp3_ = std::sqrt(alpha3);
      lambda_ = d13 * std::sqrt(alpha1 * beta3);
      kc2 = (beta3 * m1s - beta1 * m3s) / (beta3 * alpha1);
      phi0 = std::atan2(std::sqrt(beta3) * m0.y, sign_ * m0.z);
    } else {
      sign_ = m0.z >= 0.0 ? 1.0 : -1.0;
      if (alpha1 == 0.0) {
        status_ = FrbStatus::Equilibrium;
        return;
      }
      amp1_ = std::sqrt(alpha1);
      amp2_ = std::sqrt(alpha1 / beta1);
      amp3_ = std::sqrt(alpha3);
      lambda_ = d13 * std::sqrt(alpha3 * beta1);
      kc2 = (beta1 * m3s - beta3 * m1s) / (beta1 * alpha3);
      phi0 = std::atan2(std::sqrt(beta1) * m0.y, sign_ * m0.x);
    }
    modulus_ = EllipticModulus::from_complement(std::sqrt(std::fmin(kc2, 1.0)));
    K_ = complete_K(modulus_);
    u0_ = solve_phase(phi0);
    status_ = FrbStatus::Exact;

    const Vec3 back = evaluate(u0_);
    if (max_abs(back - m0) > 1e-10 * std::sqrt(casimir))
      throw NumericalError("frb_flow: elliptic reconstruction does not reproduce the initial momentum");
  }

  FrbStatus status() const { return status_; }
  bool rotates_about_axis_one() const { return axis_one_; }
  const EllipticModulus& modulus() const { return modulus_; }
  double quarter_period() const { return K_; }
  /// Angular frequency of tau = lambda t + u0; the momentum period is 4K / lambda.
  double frequency() const { return lambda_; }
  double phase() const { return u0_; }

  /// m(t) on this orbit. Negative t flows backwards.
  Vec3 at(double t) const {
    if (!std::isfinite(t)) throw std::invalid_argument("frb_flow: non-finite time");
    switch (status_) {
      case FrbStatus::Equilibrium:
        return m0_;
      case FrbStatus::DelegatedNearSeparatrix: {
        if (t == 0.0) return m0_;
        const long n_sub = std::max(1L, static_cast<long>(std::ceil(std::fabs(t) / kDelegatedStep)));
        return frb_oracle(m0_, T_, t, n_sub);
      }
      case FrbStatus::Exact:
        break;
    }
    if (t == 0.0) return m0_;
    return evaluate(u0_ + lambda_ * t);
  }

 private:
  Vec3 evaluate(double tau) const {
    const auto j = jacobi_sn_cn_dn(tau, modulus_);
    if (axis_one_) return {sign_ * amp1_ * j.dn, amp2_ * j.sn, sign_ * amp3_ * j.cn};
    return {sign_ * amp1_ * j.cn, amp2_ * j.sn, sign_ * amp3_ * j.dn};
  }

  // Solves am(u) = phi0 for u in [-2K, 2K]; am is increasing with slope dn > 0.
  double solve_phase(double phi0) const {
    double lo = -2.0 * K_, hi = 2.0 * K_;
    double u = 2.0 * K_ * phi0 / std::numbers::pi;
    for (int it = 0; it < 200; ++it) {
      const auto j = jacobi_sn_cn_dn(u, modulus_);
      const double linear = std::numbers::pi * u / (2.0 * K_);
      const double am = linear + std::remainder(std::atan2(j.sn, j.cn) - linear, 2.0 * std::numbers::pi);
      const double g = am - phi0;
      if (g == 0.0) break;
      if (g > 0.0) hi = u;
      else lo = u;
      double next = u - g / j.dn;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = next - u;
      u = next;
      if (std::fabs(step) <= kPhaseTolerance * std::fmax(1.0, std::fabs(u))) break;
    }
    return u;
  }

  Vec3 m0_;
  InertiaTensor T_;
  FrbStatus status_{FrbStatus::Equilibrium};
  bool axis_one_{false};
  double sign_{1.0};
  double amp1_{0.0}, amp2_{0.0}, amp3_{0.0};
  double lambda_{0.0};
  EllipticModulus modulus_;
  double K_{0.0};
  double u0_{0.0};
};

inline Vec3 frb_flow(const Vec3& m0, const InertiaTensor& T, double h, FrbStatus& status) {
  const FrbOrbit orbit(m0, T);
  status = orbit.status();
  return orbit.at(h);
}

/// Exact free-rigid-body flow over time h.
inline Vec3 frb_flow(const Vec3& m0, const InertiaTensor& T, double h) {
  FrbStatus status;
  return frb_flow(m0, T, h, status);
}

}  // namespace srb
