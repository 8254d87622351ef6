#include "avgrl/envs.hpp"
#include "avgrl/errors.hpp"
#include "avgrl/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace avgrl {
namespace {

// State 0 loops with reward 1; state 1 may switch to 0 (action 0) or stay (action 1), reward 0.
TabularMdp two_state() {
  return TabularMdp(2, 2, {1, 0, 1, 0, 1, 0, 0, 1}, {1, 1, 0, 0});
}

TEST(AverageReward, TwoStateHandSolution) {
  const OracleSolution sol = solve_average_reward(two_state());
  EXPECT_NEAR(sol.gain, 1.0, 1e-10);
  EXPECT_NEAR(sol.bias[0], 1.0, 1e-9);
  EXPECT_NEAR(sol.bias[1], 0.0, 1e-9);
  EXPECT_NEAR(sol.span, 1.0, 1e-9);
  EXPECT_LE(bellman_residual(two_state(), sol), 1e-9);
  for (int s = 0; s < 2; ++s) EXPECT_EQ(sol.bias[s], sol.qbias.row(s).maxCoeff());
}

TEST(AverageReward, SingleStatePicksBestAction) {
  const TabularMdp t(1, 2, {1, 1}, {0.3, 0.7});
  const OracleSolution sol = solve_average_reward(t);
  EXPECT_NEAR(sol.gain, 0.7, 1e-12);
  EXPECT_EQ(sol.span, 0.0);
}

TEST(AverageReward, ConstantRewardUniformTransitions) {
  const TabularMdp t(3, 2, std::vector<double>(18, 1.0 / 3.0), std::vector<double>(6, 0.4));
  const OracleSolution sol = solve_average_reward(t);
  EXPECT_NEAR(sol.gain, 0.4, 1e-12);
  EXPECT_NEAR(sol.span, 0.0, 1e-12);
}

TEST(AverageReward, PeriodicChainConverges) {
  // Deterministic 2-cycle: plain value iteration oscillates.
  const TabularMdp t(2, 1, {0, 1, 1, 0}, {1, 0});
  const OracleSolution sol = solve_average_reward(t);
  EXPECT_NEAR(sol.gain, 0.5, 1e-10);
  EXPECT_NEAR(sol.span, 0.5, 1e-9);
}

TEST(AverageReward, MultichainHitsIterationCap) {
  // Two absorbing states with different rewards: no constant gain.
  const TabularMdp t(2, 1, {1, 0, 0, 1}, {1, 0});
  EXPECT_THROW(solve_average_reward(t), ConvergenceError);
}

TEST(AverageReward, GainIndependentOfInitialization) {
  Rng rng(17);
  const TabularMdp t = random_unichain_tabular(5, 3, rng, 0.1);
  Vec a(5), b(5);
  for (int s = 0; s < 5; ++s) {
    a[s] = 10.0 * rng.uniform();
    b[s] = -10.0 * rng.uniform();
  }
  const double ja = solve_average_reward(t, kOracleTol, a).gain;
  const double jb = solve_average_reward(t, kOracleTol, b).gain;
  EXPECT_LE(std::abs(ja - jb), 2 * kOracleTol);
}

TEST(AverageReward, ResidualOnRandomModels) {
  Rng rng(23);
  for (int i = 0; i < 25; ++i) {
    const TabularMdp t = random_unichain_tabular(2 + static_cast<int>(rng.below(8)), 1 + static_cast<int>(rng.below(3)), rng, 0.1);
    const OracleSolution sol = solve_average_reward(t);
    ASSERT_LE(bellman_residual(t, sol), 1e-9);
    ASSERT_GE(sol.span, 0.0);
    ASSERT_EQ(sol.bias.minCoeff(), 0.0);
  }
}

TEST(Discounted, MyopicCase) {
  Rng rng(3);
  const TabularMdp t = random_unichain_tabular(4, 3, rng, 0.2);
  const Vec v = solve_discounted(t, 0.0);
  for (int s = 0; s < 4; ++s) EXPECT_EQ(v[s], std::max({t.r(s, 0), t.r(s, 1), t.r(s, 2)}));
}

TEST(Discounted, GeometricSeries) {
  const TabularMdp t(1, 1, {1}, {0.5});
  EXPECT_NEAR(solve_discounted(t, 0.9)[0], 5.0, 1e-10);
}

TEST(Discounted, TwoStateBellmanResidual) {
  const TabularMdp t = two_state();
  const double gamma = 0.9;
  const Vec v = solve_discounted(t, gamma, 1e-12);
  for (int s = 0; s < 2; ++s) {
    double best = -1e300;
    for (int a = 0; a < 2; ++a) best = std::max(best, t.r(s, a) + gamma * t.expect(s, a, v));
    EXPECT_NEAR(best, v[s], 1e-11);
  }
}

TEST(Lemma2, ConstantRewardHasZeroRatio) {
  const TabularMdp t(2, 2, std::vector<double>(8, 0.5), std::vector<double>(4, 0.3));
  const Lemma2Report r = check_lemma2(t, 0.9);
  EXPECT_EQ(r.sp_ratio, 0.0);
  EXPECT_LE(r.gain_gap, 1e-8);
  EXPECT_FALSE(r.violated());
}

TEST(Lemma2, TwoStateNoViolation) {
  for (double gamma : {0.5, 0.9, 0.99}) {
    const Lemma2Report r = check_lemma2(two_state(), gamma);
    EXPECT_FALSE(r.violated()) << gamma;
    EXPECT_LE(r.sp_discounted, 2.0 * r.sp_bias + 1e-8);
  }
}

TEST(Lemma2, RandomModelsWithinTenTimesTolerance) {
  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    const TabularMdp t = random_unichain_tabular(2 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(3)), rng, 0.15);
    for (double gamma : {0.9, 0.99}) {
      ASSERT_FALSE(check_lemma2(t, gamma, kOracleTol, 10 * kOracleTol).violated());
    }
  }
}

TEST(Span, Basic) {
  Vec v(3);
  v << 2, -1, 0.5;
  EXPECT_EQ(span(v), 3.0);
}

}  // namespace
}  // namespace avgrl
