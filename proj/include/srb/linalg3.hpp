#pragma once

// Fixed-size 3-vector, 3x3 matrix and quaternion algebra.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace srb {

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 v) { return v *= s; }
constexpr Vec3 operator*(Vec3 v, double s) { return v *= s; }
constexpr Vec3 operator/(Vec3 v, double s) { return v *= (1.0 / s); }

constexpr double dot(const Vec3& u, const Vec3& v) { return u.x * v.x + u.y * v.y + u.z * v.z; }

constexpr Vec3 cross(const Vec3& u, const Vec3& v) {
  return {u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double max_abs(const Vec3& v) { return std::fmax(std::fabs(v.x), std::fmax(std::fabs(v.y), std::fabs(v.z))); }
inline bool is_finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> a{};

  static constexpr Mat3 zero() { return {}; }
  static constexpr Mat3 identity() { return diag(1.0, 1.0, 1.0); }
  static constexpr Mat3 diag(double d0, double d1, double d2) {
    Mat3 m;
    m.a[0] = d0;
    m.a[4] = d1;
    m.a[8] = d2;
    return m;
  }
  /// Matrix of the linear map v -> w x v.
  static constexpr Mat3 skew(const Vec3& w) {
    Mat3 m;
    m.a = {0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0};
    return m;
  }

  constexpr double operator()(std::size_t r, std::size_t c) const { return a[3 * r + c]; }
  constexpr double& operator()(std::size_t r, std::size_t c) { return a[3 * r + c]; }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) a[i] += o.a[i];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) a[i] -= o.a[i];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
constexpr Mat3 operator*(double s, Mat3 m) { return m *= s; }
constexpr Mat3 operator*(Mat3 m, double s) { return m *= s; }

constexpr Mat3 operator*(const Mat3& p, const Mat3& q) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      r(i, j) = p(i, 0) * q(0, j) + p(i, 1) * q(1, j) + p(i, 2) * q(2, j);
  return r;
}

constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z, m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
          m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

constexpr Mat3 transpose(const Mat3& m) {
  Mat3 t;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) t(i, j) = m(j, i);
  return t;
}

constexpr double trace(const Mat3& m) { return m(0, 0) + m(1, 1) + m(2, 2); }

constexpr double determinant(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// Inverse via the adjugate. Caller guarantees a non-singular argument.
constexpr Mat3 inverse(const Mat3& m) {
  Mat3 adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double det = m(0, 0) * adj(0, 0) + m(0, 1) * adj(1, 0) + m(0, 2) * adj(2, 0);
  return adj * (1.0 / det);
}

inline double frobenius_norm(const Mat3& m) {
  double s = 0.0;
  for (double x : m.a) s += x * x;
  return std::sqrt(s);
}

inline bool is_finite(const Mat3& m) {
  for (double x : m.a)
    if (!std::isfinite(x)) return false;
  return true;
}

namespace detail {
inline constexpr int kExpTaylorOrder = 18;
}

/// Matrix exponential by scaling and squaring.
///
/// The argument is scaled by 2^-s so that its Frobenius norm is at most 0.5,
/// the exponential of the scaled matrix is summed as a degree-18 Taylor
/// polynomial (Horner form), and the result is squared s times. For a scaled
/// norm of 0.5 the truncation term is below 0.5^19/19! ~ 2e-23.
inline Mat3 mat_exp(const Mat3& A) {
  const double nrm = frobenius_norm(A);
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const Mat3 B = A * std::ldexp(1.0, -squarings);

  Mat3 E = Mat3::identity();
  for (int k = detail::kExpTaylorOrder; k >= 1; --k) {
    E = Mat3::identity() + (B * E) * (1.0 / k);
  }
  for (int i = 0; i < squarings; ++i) E = E * E;
  return E;
}

/// Scalar-first Hamilton quaternion.
struct Quaternion {
  double w{1.0};
  double x{0.0};
  double y{0.0};
  double z{0.0};

  static constexpr Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static constexpr Quaternion pure(const Vec3& v) { return {0.0, v.x, v.y, v.z}; }

  constexpr Vec3 vec() const { return {x, y, z}; }

  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

constexpr Quaternion quat_mul(const Quaternion& p, const Quaternion& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z, p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x, p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

constexpr Quaternion conj(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

inline double norm(const Quaternion& q) { return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z); }

inline Quaternion normalize(const Quaternion& q) {
  const double n = norm(q);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

/// exp of the pure quaternion (0, v).
inline Quaternion quat_exp_pure(const Vec3& v) {
  const double theta = norm(v);
  const double sinc = theta < 1e-8 ? 1.0 - theta * theta / 6.0 : std::sin(theta) / theta;
  return {std::cos(theta), sinc * v.x, sinc * v.y, sinc * v.z};
}

/// Rotates v by the unit quaternion q (q v q*).
inline Vec3 rotate(const Quaternion& q, const Vec3& v) {
  return quat_mul(quat_mul(q, Quaternion::pure(v)), conj(q)).vec();
}

}  // namespace srb
