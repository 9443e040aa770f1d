#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "srb/noise.hpp"

using namespace srb;

TEST(Seeding, MixSeedSeparatesIndices) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(17, 4), mix_seed(17, 4));
}

TEST(GeneratePath, Deterministic) {
  const auto a = generate_path(42, 7, 4096, 1e-3);
  const auto b = generate_path(42, 7, 4096, 1e-3);
  EXPECT_EQ(a.increments, b.increments);
  EXPECT_NE(a.increments, generate_path(42, 8, 4096, 1e-3).increments);
  EXPECT_NE(a.increments, generate_path(43, 7, 4096, 1e-3).increments);
}

TEST(GeneratePath, IncrementsOnDyadicGrid) {
  const auto p = generate_path(1, 0, 1000, 0.01);
  for (double d : p.increments) EXPECT_EQ(d, std::nearbyint(d / kIncrementQuantum) * kIncrementQuantum);
}

TEST(GeneratePath, UnitVarianceAtUnitStep) {
  const std::size_t n = 1000000;
  const auto p = generate_path(2024, 0, n, 1.0);
  double mean = 0.0;
  for (double d : p.increments) mean += d;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double d : p.increments) var += (d - mean) * (d - mean);
  var /= static_cast<double>(n - 1);
  EXPECT_GE(var, 0.99);
  EXPECT_LE(var, 1.01);
  EXPECT_LT(std::fabs(mean), 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GeneratePath, DistinctPathsUncorrelated) {
  const std::size_t n = 100000;
  const auto p = generate_path(5, 0, n, 1.0), q = generate_path(5, 1, n, 1.0);
  double c = 0.0, sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c += p.increments[i] * q.increments[i];
    sp += p.increments[i] * p.increments[i];
    sq += q.increments[i] * q.increments[i];
  }
  EXPECT_LT(std::fabs(c / std::sqrt(sp * sq)), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GeneratePath, RejectsBadArguments) {
  EXPECT_THROW(generate_path(1, 0, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(generate_path(1, 0, 10, 0.0), std::invalid_argument);
}

TEST(Coarsen, FactorOneIsIdentity) {
  const auto p = generate_path(1, 2, 64, 1.0 / 64);
  const auto c = coarsen(p, 1);
  EXPECT_EQ(c.increments, p.increments);
  EXPECT_EQ(c.dt, p.dt);
}

TEST(Coarsen, WholePathGivesTerminalValue) {
  const auto p = generate_path(1, 2, 1024, 1.0 / 1024);
  const auto c = coarsen(p, 1024);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.increments[0], p.terminal());
  EXPECT_DOUBLE_EQ(c.dt, 1.0);
}

TEST(Coarsen, BlockSumsAreAssociativeBitForBit) {
  const auto p = generate_path(9, 3, 4096, 1.0 / 4096);
  EXPECT_EQ(coarsen(coarsen(p, 2), 2).increments, coarsen(p, 4).increments);
  EXPECT_EQ(coarsen(coarsen(p, 8), 16).increments, coarsen(p, 128).increments);
  for (std::size_t f : {2u, 4u, 32u, 512u}) EXPECT_EQ(coarsen(p, f).terminal(), p.terminal());
}

TEST(Coarsen, NonDivisibleFactorThrows) {
  const auto p = generate_path(1, 0, 100, 0.01);
  EXPECT_THROW(coarsen(p, 3), std::invalid_argument);
  EXPECT_THROW(coarsen(p, 0), std::invalid_argument);
}

TEST(IncrementsCsv, Schema) {
  std::ostringstream os;
  write_increments_csv(os, {generate_path(1, 4, 2, 0.5)});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "path_index,step_index,dW");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("4,0,", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("4,1,", 0), 0u);
}

TEST(InertiaPerturbation, SymmetricModeIsExactlySymmetric) {
  const MartingaleMatrixSpec spec{1e-3, MartingaleMode::Symmetric, 11};
  const auto path = generate_inertia_path(spec, 200, 0.25);
  for (const Mat3& W : path.values) EXPECT_EQ(W - transpose(W), Mat3::zero());
}

TEST(InertiaPerturbation, FullModeIsNotSymmetric) {
  const MartingaleMatrixSpec spec{1e-3, MartingaleMode::Full, 11};
  const Mat3 W = sample_inertia_perturbation(spec, 1, 1.0, Mat3::zero());
  EXPECT_NE(W(0, 1), W(1, 0));
}

TEST(InertiaPerturbation, StartsAtZeroAndIsReproducible) {
  const MartingaleMatrixSpec spec{1e-3, MartingaleMode::Symmetric, 3};
  const auto a = generate_inertia_path(spec, 50, 0.1), b = generate_inertia_path(spec, 50, 0.1);
  EXPECT_EQ(a.values.front(), Mat3::zero());
  EXPECT_EQ(a.values.size(), 51u);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_EQ(a.values[i], b.values[i]);
  EXPECT_NE(spec.for_path(0).seed, spec.for_path(1).seed);
}

TEST(InertiaPerturbation, ZeroEpsilonContributesNothing) {
  const MartingaleMatrixSpec spec{0.0, MartingaleMode::Symmetric, 3};
  const auto p = generate_inertia_path(spec, 20, 0.5);
  for (const Mat3& W : p.values) EXPECT_EQ(spec.epsilon * W, Mat3::zero());
}

TEST(InertiaPerturbation, MartingaleIncrementsHaveZeroMean) {
  const MartingaleMatrixSpec spec{1e-3, MartingaleMode::Full, 21};
  const double dt = 0.25;
  const std::size_t n = 20000;
  Mat3 sum{};
  Mat3 prev{};
  for (std::size_t i = 1; i <= n; ++i) {
    const Mat3 next = sample_inertia_perturbation(spec, i, dt, prev);
    sum += next - prev;
    prev = next;
  }
  const double sigma = std::sqrt(dt / static_cast<double>(n));
  for (double x : sum.a) EXPECT_LT(std::fabs(x / static_cast<double>(n)), 5.0 * sigma);
}

TEST(InertiaPerturbation, CoarseningSubsamples) {
  const MartingaleMatrixSpec spec{1e-3, MartingaleMode::Symmetric, 8};
  const auto fine = generate_inertia_path(spec, 64, 1.0 / 64);
  const auto coarse = coarsen(fine, 8);
  ASSERT_EQ(coarse.steps(), 8u);
  for (std::size_t i = 0; i <= 8; ++i) EXPECT_EQ(coarse.values[i], fine.values[8 * i]);
  EXPECT_THROW(coarsen(fine, 5), std::invalid_argument);
}
