#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "srb/frb.hpp"

using namespace srb;

namespace {

const InertiaTensor kT(0.9144, 1.098, 1.66);
const Vec3 kM0{0.4165, 0.9072, 0.0577};

double separatrix_distance(const Vec3& m, const InertiaTensor& T) {
  return m.x * m.x * (T.t2() - T.t1()) / T.t1() - m.z * m.z * (T.t3() - T.t2()) / T.t3();
}

}  // namespace

TEST(InertiaTensor, Validation) {
  EXPECT_THROW(InertiaTensor(1.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(InertiaTensor(2.0, 1.5, 3.0), std::invalid_argument);
  EXPECT_THROW(InertiaTensor(0.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(InertiaTensor(1.0, 2.0, INFINITY), std::invalid_argument);
  EXPECT_NO_THROW(InertiaTensor(1.0, 1.1, 1.2));
}

TEST(Energy, Examples) {
  EXPECT_EQ(energy({0, 0, 0}, kT.inverse_matrix()), 0.0);
  EXPECT_DOUBLE_EQ(energy({1, 0, 0}, InertiaTensor(2.0, 3.0, 4.0).inverse_matrix()), 0.25);
  const double direct = 0.5 * (kM0.x * kM0.x / 0.9144 + kM0.y * kM0.y / 1.098 + kM0.z * kM0.z / 1.66);
  EXPECT_GT(direct, 0.0);
  EXPECT_NEAR(energy(kM0, kT.inverse_matrix()), direct, 4e-16);
  EXPECT_NEAR(conserved(kM0, kT).energy, direct, 4e-16);
}

TEST(FrbOracle, PrincipalAxisIsFixed) {
  for (const Vec3& m : {Vec3{1.3, 0, 0}, Vec3{0, -0.7, 0}, Vec3{0, 0, 2.0}})
    EXPECT_LT(max_abs(frb_oracle(m, kT, 3.0, 1000) - m), 1e-14);
}

TEST(FrbOracle, FourthOrderSelfConvergence) {
  const double h = 2.0;
  const Vec3 r32 = frb_oracle(kM0, kT, h, 32), r64 = frb_oracle(kM0, kT, h, 64), r128 = frb_oracle(kM0, kT, h, 128);
  const Vec3 limit = r128 + (r128 - r64) / 15.0;
  const double ratio = max_abs(r32 - limit) / max_abs(r64 - limit);
  EXPECT_GT(ratio, 13.0);
  EXPECT_LT(ratio, 19.0);
}

TEST(FrbOracle, ConsistentWithTaylorExpansion) {
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const Vec3 taylor = kM0 + h * euler_rhs(kM0, kT);
    EXPECT_LT(max_abs(frb_oracle(kM0, kT, h, 1) - taylor), 2.0 * h * h);
  }
}

TEST(FrbOracle, RejectsBadInput) {
  EXPECT_THROW(frb_oracle(kM0, kT, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(frb_oracle({NAN, 0, 0}, kT, 1.0, 10), std::invalid_argument);
}

TEST(FrbFlow, PrincipalAxisEquilibrium) {
  for (double h : {0.1, 1.0, 100.0}) {
    EXPECT_EQ(frb_flow({0.8, 0, 0}, kT, h), (Vec3{0.8, 0, 0}));
    EXPECT_EQ(frb_flow({0, 0, -0.8}, kT, h), (Vec3{0, 0, -0.8}));
  }
  FrbStatus st;
  frb_flow({0, 0, 0}, kT, 1.0, st);
  EXPECT_EQ(st, FrbStatus::Equilibrium);
}

TEST(FrbFlow, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    const Vec3 m{n(rng), n(rng), n(rng)};
    EXPECT_EQ(frb_flow(m, kT, 0.0), m);
  }
}

TEST(FrbFlow, InitialDataAgainstFineOracle) {
  FrbStatus st;
  const Vec3 exact = frb_flow(kM0, kT, 1.0, st);
  EXPECT_EQ(st, FrbStatus::Exact);
  EXPECT_LT(max_abs(exact - frb_oracle(kM0, kT, 1.0, 1000000)), 1e-10);
}

TEST(FrbFlow, RotationAboutAxisThree) {
  const Vec3 m{0.1, 0.2, 0.97};
  const FrbOrbit orbit(m, kT);
  EXPECT_EQ(orbit.status(), FrbStatus::Exact);
  EXPECT_FALSE(orbit.rotates_about_axis_one());
  for (double h : {0.3, 1.0, 4.5}) EXPECT_LT(max_abs(orbit.at(h) - frb_oracle(m, kT, h, 200000)), 1e-10) << "h " << h;
}

TEST(FrbFlow, RotationAboutAxisOne) {
  const Vec3 m{-0.95, 0.3, 0.1};
  const FrbOrbit orbit(m, kT);
  EXPECT_TRUE(orbit.rotates_about_axis_one());
  for (double h : {0.3, 1.0, 4.5}) EXPECT_LT(max_abs(orbit.at(h) - frb_oracle(m, kT, h, 200000)), 1e-10) << "h " << h;
}

TEST(FrbFlow, RandomOrbitsMatchOracle) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> uh(-1.0, 1.0);
  int tested = 0;
  while (tested < 100) {
    Vec3 m{n(rng), n(rng), n(rng)};
    m = (0.2 + 2.0 * std::fabs(uh(rng))) * m / norm(m);
    if (std::fabs(separatrix_distance(m, kT)) < 1e-3 * dot(m, m)) continue;
    const double h = uh(rng);
    EXPECT_LT(max_abs(frb_flow(m, kT, h) - frb_oracle(m, kT, h, 20000)), 1e-8 * std::fmax(1.0, norm(m)));
    ++tested;
  }
}

TEST(FrbFlow, GroupProperty) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> uh(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 m{n(rng), n(rng), n(rng)};
    const double h1 = uh(rng), h2 = uh(rng);
    EXPECT_LT(max_abs(frb_flow(frb_flow(m, kT, h1), kT, h2) - frb_flow(m, kT, h1 + h2)), 1e-11 * std::fmax(1.0, norm(m)));
  }
}

TEST(FrbFlow, BackwardTimeInvertsForward) {
  const Vec3 there = frb_flow(kM0, kT, 13.7);
  EXPECT_LT(max_abs(frb_flow(there, kT, -13.7) - kM0), 1e-13);
}

TEST(FrbFlow, ConservesEnergyAndCasimirOverLongRuns) {
  const auto c0 = conserved(kM0, kT);
  Vec3 m = kM0;
  for (int i = 0; i < 10000; ++i) m = frb_flow(m, kT, 0.1);
  const auto c1 = conserved(m, kT);
  EXPECT_LT(std::fabs(c1.energy - c0.energy) / c0.energy, 1e-12);
  EXPECT_LT(std::fabs(c1.casimir - c0.casimir) / c0.casimir, 1e-12);
}

TEST(FrbFlow, PeriodFromQuarterPeriod) {
  const FrbOrbit orbit(kM0, kT);
  const double period = 4.0 * orbit.quarter_period() / orbit.frequency();
  EXPECT_LT(max_abs(orbit.at(period) - kM0), 1e-12);
  EXPECT_GT(max_abs(orbit.at(0.5 * period) - kM0), 0.1);
}

TEST(FrbFlow, NearSeparatrixIsDelegated) {
  // Choose m1 so that the separatrix distance vanishes to rounding.
  const double m3 = 0.5, m2 = 0.6;
  const double m1 = std::sqrt(m3 * m3 * (kT.t3() - kT.t2()) / kT.t3() * kT.t1() / (kT.t2() - kT.t1()));
  const Vec3 m{m1, m2, m3};
  FrbStatus st;
  const Vec3 out = frb_flow(m, kT, 0.5, st);
  EXPECT_EQ(st, FrbStatus::DelegatedNearSeparatrix);
  EXPECT_LT(max_abs(out - frb_oracle(m, kT, 0.5, 100000)), 1e-12);
  EXPECT_NEAR(norm(out), norm(m), 1e-12);
}

TEST(FrbFlow, CloseToSeparatrixStillExact) {
  const double m3 = 0.5, m2 = 0.6;
  const double m1 = std::sqrt(m3 * m3 * (kT.t3() - kT.t2()) / kT.t3() * kT.t1() / (kT.t2() - kT.t1())) * (1.0 + 1e-6);
  const Vec3 m{m1, m2, m3};
  FrbStatus st;
  const Vec3 out = frb_flow(m, kT, 2.0, st);
  EXPECT_EQ(st, FrbStatus::Exact);
  EXPECT_LT(max_abs(out - frb_oracle(m, kT, 2.0, 200000)), 1e-9);
}

TEST(FrbFlow, NonFiniteInputThrows) {
  EXPECT_THROW(frb_flow({NAN, 1, 0}, kT, 1.0), std::invalid_argument);
  EXPECT_THROW(frb_flow(kM0, kT, INFINITY), std::invalid_argument);
}
