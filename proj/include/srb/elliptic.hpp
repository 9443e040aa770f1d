#pragma once

// Jacobi elliptic functions sn, cn, dn and the complete elliptic integral of
// the first kind K, both by descending Gauss/Landen transformations.
//
// Modulus convention: k is the modulus (not the parameter m = k^2).

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace srb {

/// Elliptic modulus 0 <= k < 1 together with k^2 and the complementary
/// modulus k' = sqrt(1 - k^2).
///
/// Near k = 1 the complement carries the information; construct from it
/// directly (from_complement) when it is available without cancellation.
class EllipticModulus {
 public:
  explicit EllipticModulus(double k) : k_(k), k2_(k * k), kc_(std::sqrt((1.0 - k) * (1.0 + k))) {
    if (!(k >= 0.0 && k < 1.0)) throw std::domain_error("elliptic modulus must satisfy 0 <= k < 1, got " + std::to_string(k));
  }

  static EllipticModulus from_complement(double kc) {
    if (!(kc > 0.0 && kc <= 1.0))
      throw std::domain_error("complementary modulus must satisfy 0 < k' <= 1, got " + std::to_string(kc));
    EllipticModulus m;
    m.kc_ = kc;
    m.k2_ = (1.0 - kc) * (1.0 + kc);
    m.k_ = std::sqrt(m.k2_);
    return m;
  }

  double k() const { return k_; }
  double k2() const { return k2_; }
  double kc() const { return kc_; }

 private:
  EllipticModulus() = default;
  double k_{0.0};
  double k2_{0.0};
  double kc_{1.0};
};

struct JacobiTriple {
  double sn;
  double cn;
  double dn;
};

namespace detail {
inline constexpr int kLandenMaxLevels = 32;
// Below this modulus sn = sin to within k^2 |u| ~ 1e-24 |u|.
inline constexpr double kLandenFloor = 1e-12;
}  // namespace detail

/// K(k), via the arithmetic-geometric mean K = pi / (2 agm(1, k')).
inline double complete_K(const EllipticModulus& mod) {
  double a = 1.0;
  double b = mod.kc();
  for (int i = 0; i < detail::kLandenMaxLevels; ++i) {
    if (std::fabs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * a) break;
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (a + b);
}

/// sn, cn and dn of (u, k).
///
/// Descends k -> k1 = (1 - k')/(1 + k') with u -> u/(1 + k1) until the modulus
/// is negligible, evaluates the trigonometric limit, then ascends with
///   sn = (1 + k1) s / (1 + k1 s^2),  cn = c d / (1 + k1 s^2),
///   dn = (1 - k1 s^2) / (1 + k1 s^2).
/// All denominators are >= 1, so the ascent is well conditioned for every
/// branch, including cn = 0.
inline JacobiTriple jacobi_sn_cn_dn(double u, const EllipticModulus& mod) {
  std::array<double, detail::kLandenMaxLevels> kdesc{};
  double k = mod.k();
  double kc = mod.kc();
  double v = u;
  int levels = 0;
  while (k > detail::kLandenFloor && levels < detail::kLandenMaxLevels) {
    const double skc = std::sqrt(kc);
    const double k_next = (k / (1.0 + kc)) * (k / (1.0 + kc));
    kc = 2.0 * skc / (1.0 + kc);
    k = k_next;
    kdesc[static_cast<std::size_t>(levels++)] = k;
    v /= 1.0 + k;
  }

  double s = std::sin(v);
  double c = std::cos(v);
  double d = std::sqrt(1.0 - k * k * s * s);
  for (int n = levels - 1; n >= 0; --n) {
    const double kn = kdesc[static_cast<std::size_t>(n)];
    const double ks2 = kn * s * s;
    const double denom = 1.0 + ks2;
    const double s_up = (1.0 + kn) * s / denom;
    c = c * d / denom;
    d = (1.0 - ks2) / denom;
    s = s_up;
  }
  return {s, c, d};
}

/// Jacobi amplitude am(u, k), continuous in u, given K = K(k).
///
/// am(u) - pi u / (2K) is 2K-periodic with magnitude below pi/2, so the
/// principal atan2 branch is unwrapped against the linear part.
inline double jacobi_amplitude(double u, const EllipticModulus& mod, double K) {
  const auto t = jacobi_sn_cn_dn(u, mod);
  const double linear = std::numbers::pi * u / (2.0 * K);
  double dev = std::atan2(t.sn, t.cn) - linear;
  dev = std::remainder(dev, 2.0 * std::numbers::pi);
  return linear + dev;
}

inline double jacobi_amplitude(double u, const EllipticModulus& mod) { return jacobi_amplitude(u, mod, complete_K(mod)); }

}  // namespace srb
