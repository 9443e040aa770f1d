#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "srb/linalg3.hpp"

using namespace srb;

namespace {

using LMat = std::array<long double, 9>;

LMat lmul(const LMat& p, const LMat& q) {
  LMat r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[3 * i + j] += p[3 * i + k] * q[3 * k + j];
  return r;
}

// Plain Taylor series of exp(A) in extended precision, 60 terms, no scaling.
Mat3 taylor_exp_oracle(const Mat3& A) {
  LMat a{}, term{}, sum{};
  for (int i = 0; i < 9; ++i) a[i] = A.a[i];
  term[0] = term[4] = term[8] = 1.0L;
  sum = term;
  for (int k = 1; k <= 60; ++k) {
    term = lmul(term, a);
    for (auto& t : term) t /= static_cast<long double>(k);
    for (int i = 0; i < 9; ++i) sum[i] += term[i];
  }
  Mat3 out;
  for (int i = 0; i < 9; ++i) out.a[i] = static_cast<double>(sum[i]);
  return out;
}

double max_abs_diff(const Mat3& p, const Mat3& q) {
  double d = 0.0;
  for (int i = 0; i < 9; ++i) d = std::fmax(d, std::fabs(p.a[i] - q.a[i]));
  return d;
}

Quaternion random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return normalize(Quaternion{n(rng), n(rng), n(rng), n(rng)});
}

}  // namespace

TEST(Cross, BasisIdentity) { EXPECT_EQ(cross({1, 0, 0}, {0, 1, 0}), (Vec3{0, 0, 1})); }

TEST(Cross, SelfProductVanishes) {
  const Vec3 u{0.3, -1.7, 2.2};
  EXPECT_EQ(cross(u, u), (Vec3{0, 0, 0}));
}

TEST(Cross, HandComputedDeterminant) { EXPECT_EQ(cross({1, 2, 3}, {4, 5, 6}), (Vec3{-3, 6, -3})); }

TEST(Mat3, InverseViaAdjugate) {
  Mat3 A;
  A.a = {2, 1, 0, 1, 3, 1, 0, 1, 4};
  EXPECT_LT(max_abs_diff(A * inverse(A), Mat3::identity()), 1e-15);
  EXPECT_DOUBLE_EQ(determinant(A), 18.0);
  EXPECT_DOUBLE_EQ(trace(A), 9.0);
}

TEST(MatExp, ZeroGivesIdentity) { EXPECT_EQ(mat_exp(Mat3::zero()), Mat3::identity()); }

TEST(MatExp, DiagonalCase) {
  const Mat3 E = mat_exp(Mat3::diag(0.3, -1.2, 2.5));
  const Mat3 ref = Mat3::diag(std::exp(0.3), std::exp(-1.2), std::exp(2.5));
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(E.a[i], ref.a[i], 2e-15 * std::fabs(ref.a[i]));
}

TEST(MatExp, SkewMatchesRodrigues) {
  const Vec3 axis = Vec3{1.0, -2.0, 0.5} / norm(Vec3{1.0, -2.0, 0.5});
  for (double theta : {1e-9, 0.1, 1.0, 3.0, 7.5}) {
    const Mat3 K = Mat3::skew(axis);
    const Mat3 rodrigues = Mat3::identity() + std::sin(theta) * K + (1.0 - std::cos(theta)) * (K * K);
    EXPECT_LT(max_abs_diff(mat_exp(theta * K), rodrigues), 1e-14) << "theta " << theta;
  }
}

TEST(MatExp, MatchesExtendedPrecisionTaylor) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    Mat3 A;
    for (auto& x : A.a) x = u(rng);
    A = (scale(rng) / frobenius_norm(A)) * A;
    const Mat3 ref = taylor_exp_oracle(A);
    const double rel = frobenius_norm(mat_exp(A) - ref) / std::fmax(1.0, frobenius_norm(ref));
    EXPECT_LT(rel, 1e-12) << "trial " << trial;
  }
}

TEST(Quaternion, IdentityIsNeutral) {
  const Quaternion q{0.5, -0.5, 0.5, 0.5};
  EXPECT_EQ(quat_mul(Quaternion::identity(), q), q);
  EXPECT_EQ(quat_mul(q, Quaternion::identity()), q);
}

TEST(Quaternion, ConjugateInverts) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Quaternion q = random_unit(rng);
    const Quaternion r = quat_mul(q, conj(q));
    EXPECT_NEAR(r.w, 1.0, 1e-15);
    EXPECT_NEAR(norm(r.vec()), 0.0, 1e-15);
  }
}

TEST(Quaternion, NormMultiplicative) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) EXPECT_NEAR(norm(quat_mul(random_unit(rng), random_unit(rng))), 1.0, 1e-12);
}

TEST(Quaternion, HamiltonProductOfBasis) {
  const Quaternion i{0, 1, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1};
  EXPECT_EQ(quat_mul(i, j), k);
  EXPECT_EQ(quat_mul(j, i), (Quaternion{0, 0, 0, -1}));
}

TEST(QuatExpPure, ZeroGivesIdentity) { EXPECT_EQ(quat_exp_pure({0, 0, 0}), Quaternion::identity()); }

TEST(QuatExpPure, QuarterTurnArgument) {
  const Quaternion q = quat_exp_pure({std::numbers::pi / 2, 0, 0});
  EXPECT_NEAR(q.w, 0.0, 1e-16);
  EXPECT_NEAR(q.x, 1.0, 1e-16);
  EXPECT_EQ(q.y, 0.0);
  EXPECT_EQ(q.z, 0.0);
}

TEST(QuatExpPure, UnitNorm) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) EXPECT_NEAR(norm(quat_exp_pure({n(rng), n(rng), n(rng)})), 1.0, 1e-12);
  EXPECT_NEAR(norm(quat_exp_pure({1e-10, -2e-10, 0})), 1.0, 1e-16);
}

TEST(QuatExpPure, RotationAgreesWithMatrixExponential) {
  const Vec3 w{0.4, -0.9, 0.25};
  const Quaternion q = quat_exp_pure(0.5 * w);
  const Mat3 R = mat_exp(Mat3::skew(w));
  const Vec3 v{1.0, 2.0, -0.5};
  EXPECT_LT(max_abs(rotate(q, v) - R * v), 1e-14);
}
