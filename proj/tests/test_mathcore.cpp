#include "avgrl/errors.hpp"
#include "avgrl/mathcore.hpp"
#include "avgrl/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace avgrl {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec random_unit(int d, Rng& rng) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
  return v / v.norm();
}

TEST(Clip, SaturatesAndPassesThrough) {
  EXPECT_EQ(clip(5, 1, 3), 3);
  EXPECT_EQ(clip(0, 1, 3), 1);
  EXPECT_EQ(clip(2, 1, 3), 2);
  EXPECT_EQ(clip(2, 2, 2), 2);
}

TEST(Clip, InvertedBoundsAreAContractViolation) {
  EXPECT_THROW(clip(0, 3, 1), ContractViolation);
}

TEST(Clip, LatticeFormReturnsUpperWhenInverted) {
  EXPECT_EQ(clip_lattice(5, 6, 4), 4);
  EXPECT_EQ(clip_lattice(2, 1, 3), 2);
}

TEST(Mahalanobis, IdentityUnitVector) {
  PsdMatrixState m(2, 1.0);
  EXPECT_NEAR(m.mahalanobis(vec2(0.6, 0.8)), 1.0, 1e-15);
}

TEST(Mahalanobis, ScaledIdentity) {
  PsdMatrixState m(2, 2.0);
  EXPECT_NEAR(mahalanobis(m, vec2(0.6, 0.8)), kInvSqrt2, 1e-12);
}

TEST(Mahalanobis, AfterOneUpdate) {
  PsdMatrixState m(2, 1.0);
  m.rank1_update(vec2(1, 0));
  EXPECT_NEAR(m.mahalanobis(vec2(1, 0)), kInvSqrt2, 1e-12);
}

TEST(Mahalanobis, DimensionMismatchThrows) {
  PsdMatrixState m(2, 1.0);
  EXPECT_THROW(m.mahalanobis(Vec::Ones(3)), ContractViolation);
  EXPECT_THROW(m.rank1_update(Vec::Ones(3)), ContractViolation);
}

TEST(Rank1Update, DiagonalCase) {
  const PsdMatrixState m = rank1_update(PsdMatrixState(2, 1.0), vec2(1, 0));
  EXPECT_DOUBLE_EQ(m.mat()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(m.mat()(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.inv()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.inv()(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.inv()(0, 1), 0.0);
  EXPECT_NEAR(m.logdet(), std::log(2.0), 1e-15);
}

TEST(Rank1Update, ZeroVectorLeavesStateUnchanged) {
  PsdMatrixState m(3, 1.5);
  const Mat inv = m.inv();
  const double ld = m.logdet();
  m.rank1_update(Vec::Zero(3));
  EXPECT_EQ(m.inv(), inv);
  EXPECT_EQ(m.logdet(), ld);
}

TEST(Rank1Update, TenThousandUpdatesMatchDirectInversion) {
  Rng rng(42);
  PsdMatrixState m(8, 1.0);
  for (int i = 0; i < 10000; ++i) m.rank1_update(random_unit(8, rng));
  const Mat direct = m.mat().inverse();
  EXPECT_LE((m.inv() - direct).norm(), 1e-8);
  EXPECT_LE((m.mat() * m.inv() - Mat::Identity(8, 8)).norm(), 1e-8);
  EXPECT_NEAR(m.logdet(), std::log(m.mat().determinant()), 1e-6);
}

TEST(Rank1Update, MahalanobisBoundedByInverseLambda) {
  Rng rng(3);
  const double lambda = 0.5;
  PsdMatrixState m(4, lambda);
  for (int i = 0; i < 200; ++i) {
    const Vec phi = random_unit(4, rng) * rng.uniform();
    const double q = m.mahalanobis(phi);
    EXPECT_LE(q * q, phi.squaredNorm() / lambda + 1e-12);
    m.rank1_update(phi);
  }
}

TEST(Rank1Update, EllipticalPotentialBound) {
  Rng rng(11);
  const int d = 5;
  PsdMatrixState m(d, 1.0);
  double sum = 0.0;
  for (int t = 1; t <= 2000; ++t) {
    const Vec phi = random_unit(d, rng);
    sum += phi.dot(m.inv() * phi);
    m.rank1_update(phi);
    ASSERT_LE(sum, 2.0 * d * std::log(1.0 + t)) << "t=" << t;
  }
}

TEST(ExtendedThreshold, UnsetBehavesAsInfinity) {
  const auto u = ExtendedThreshold::unset();
  EXPECT_FALSE(u.is_set());
  EXPECT_TRUE(std::isinf(u.value()));
  EXPECT_EQ(u.min_with(3.0).value(), 3.0);
  EXPECT_EQ(ExtendedThreshold(2.0).min_with(3.0).value(), 2.0);
  EXPECT_EQ(ExtendedThreshold(2.0).min_with(1.0).value(), 1.0);
}

TEST(ExtendedThreshold, SentinelArithmeticNeverProducesNaN) {
  const auto u = ExtendedThreshold::unset();
  const ExtendedThreshold f(1.0);
  EXPECT_EQ(shifted_lower_bound(5.0, u, f), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(shifted_lower_bound(5.0, u, u), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(shifted_lower_bound(5.0, ExtendedThreshold(3.0), f), 3.0);
  EXPECT_EQ(threshold_gap(u, f), std::numeric_limits<double>::infinity());
  EXPECT_EQ(threshold_gap(ExtendedThreshold(3.0), f), 2.0);
}

TEST(Rng, DeterministicAndSplitStreamsDiffer) {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c = split(Rng(7), Stream::kEnvironment);
  Rng d = split(Rng(7), Stream::kAgent);
  EXPECT_NE(c.next_u64(), d.next_u64());
  Rng e(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = e.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(e.below(3), 3u);
  }
}

TEST(Rng, SplitMixReferenceValue) {
  // First output of SplitMix64 seeded with 0.
  Rng r(0);
  EXPECT_EQ(r.next_u64(), 0xE220A8397B1DCDAFULL);
}

}  // namespace
}  // namespace avgrl
