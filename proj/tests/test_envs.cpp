#include "avgrl/envs.hpp"
#include "avgrl/errors.hpp"
#include "avgrl/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

namespace avgrl {
namespace {

TabularMdp two_by_two() {
  return TabularMdp(2, 2, {1, 0, 0.5, 0.5, 0, 1, 0.25, 0.75}, {0.1, 0.2, 0.3, 0.4});
}

bool has_constraint(const ValidationReport& r, const std::string& name) {
  for (const auto& v : r.violations) {
    if (v.constraint == name) return true;
  }
  return false;
}

TEST(EmbedTabular, OneHotLayout) {
  const LinearMdpModel m = embed_tabular(two_by_two());
  EXPECT_EQ(m.dim(), 4);
  Vec expected = Vec::Zero(4);
  expected[1] = 1.0;
  EXPECT_EQ(m.phi(0, 1), expected);
  EXPECT_TRUE(m.is_one_hot());
  EXPECT_DOUBLE_EQ(m.reward(1, 0), 0.3);
  EXPECT_NEAR(m.transition_dist(1, 1)[1], 0.75, 1e-15);
  EXPECT_TRUE(validate(m).ok());
}

TEST(EmbedTabular, IdentityTransitionMeasures) {
  const TabularMdp id(3, 2, {1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1}, std::vector<double>(6, 0.5));
  const LinearMdpModel m = embed_tabular(id);
  for (int k = 0; k < m.dim(); ++k) {
    int ones = 0;
    for (int n = 0; n < 3; ++n) ones += m.measures()(k, n) == 1.0 ? 1 : 0;
    EXPECT_EQ(ones, 1);
  }
}

TEST(EmbedTabular, TotalMeasureNormIsSqrtD) {
  Rng rng(4);
  const LinearMdpModel m = embed_tabular(random_unichain_tabular(4, 3, rng, 0.3));
  const Vec total = m.measures().rowwise().sum();
  EXPECT_NEAR(total.norm(), std::sqrt(12.0), 1e-12);
}

TEST(EmbedTabular, RandomModelsValidate) {
  Rng rng(100);
  for (int i = 0; i < 100; ++i) {
    const int S = 1 + static_cast<int>(rng.below(6));
    const int A = 1 + static_cast<int>(rng.below(3));
    const TabularMdp t = random_unichain_tabular(S, A, rng, 0.1);
    ASSERT_TRUE(validate(t).ok());
    ASSERT_TRUE(validate(embed_tabular(t)).ok());
  }
}

TEST(Validate, ReportsRowSumViolation) {
  Mat f = Mat::Identity(2, 2);
  Mat mu(2, 2);
  mu << 0.5, 0.4, 0.5, 0.5;  // row (s=0,a=0) sums to 0.9
  Vec theta = Vec::Constant(2, 0.5);
  const LinearMdpModel m(2, 1, f, mu, theta);
  const ValidationReport r = validate(m);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_constraint(r, "transition_row_sum"));
  bool named = false;
  for (const auto& v : r.violations) {
    if (v.constraint == "transition_row_sum" && v.where.find("s=0") != std::string::npos) named = true;
  }
  EXPECT_TRUE(named);
}

TEST(Validate, ReportsThetaNormViolation) {
  const int d = 2;
  Mat f = Mat::Zero(1, d);
  Mat mu = Mat::Constant(d, 1, 1.0);
  f(0, 0) = 1.0;
  Vec theta(d);
  theta << 0.0, std::sqrt(2.0) + 0.1;
  const LinearMdpModel m(1, 1, f, mu, theta);
  EXPECT_TRUE(has_constraint(validate(m), "theta_norm"));
}

TEST(Validate, ReportsFeatureNormAndRewardRange) {
  Mat f(1, 2);
  f << 1.0, 1.0;
  Mat mu(2, 1);
  mu << 0.5, 0.5;
  Vec theta(2);
  theta << 1.0, 1.0;
  const ValidationReport r = validate(LinearMdpModel(1, 1, f, mu, theta));
  EXPECT_TRUE(has_constraint(r, "feature_norm"));
  EXPECT_TRUE(has_constraint(r, "reward_range"));
}

TEST(SampleNext, DeterministicTransitionAlwaysSameState) {
  const LinearMdpModel m = embed_tabular(two_by_two());
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_next(m, 0, 0, rng), 0);
}

TEST(SampleNext, UniformFrequency) {
  const LinearMdpModel m = embed_tabular(TabularMdp(2, 1, {0.5, 0.5, 0.5, 0.5}, {0, 0}));
  Rng rng(2024);
  int zeros = 0;
  for (int i = 0; i < 100000; ++i) zeros += sample_next(m, 0, 0, rng) == 0 ? 1 : 0;
  EXPECT_NEAR(zeros / 1e5, 0.5, 0.01);
}

TEST(SampleNext, SameSeedSameSequence) {
  Rng g(8);
  const LinearMdpModel m = embed_tabular(random_unichain_tabular(5, 2, g, 0.2));
  Rng a(77), b(77);
  for (int i = 0; i < 500; ++i) ASSERT_EQ(sample_next(m, i % 5, i % 2, a), sample_next(m, i % 5, i % 2, b));
}

TEST(SampleNext, EmpiricalDistributionWithinTotalVariation) {
  Rng g(12);
  const LinearMdpModel m = embed_tabular(random_unichain_tabular(6, 2, g, 0.2));
  Rng rng(13);
  std::vector<double> counts(6, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(sample_next(m, 3, 1, rng))] += 1.0;
  const Vec p = m.transition_dist(3, 1);
  double tv = 0.0;
  for (int s = 0; s < 6; ++s) tv += std::abs(counts[static_cast<std::size_t>(s)] / n - p[s]);
  EXPECT_LE(0.5 * tv, 0.02);
}

TEST(RandomUnichain, SingleStateGainIsBestReward) {
  Rng rng(6);
  const TabularMdp t = random_unichain_tabular(1, 3, rng, 0.5);
  const double best = std::max({t.r(0, 0), t.r(0, 1), t.r(0, 2)});
  EXPECT_NEAR(solve_average_reward(t).gain, best, 1e-10);
}

TEST(RandomUnichain, FullMixingGivesUniformRows) {
  Rng rng(6);
  const TabularMdp t = random_unichain_tabular(4, 2, rng, 1.0);
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int n = 0; n < 4; ++n) ASSERT_EQ(t.p(s, a, n), 0.25);
    }
  }
}

TEST(RandomUnichain, OracleConverges) {
  Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    const TabularMdp t = random_unichain_tabular(5, 2, rng, 0.05);
    const OracleSolution sol = solve_average_reward(t);
    EXPECT_LE(bellman_residual(t, sol), 1e-9);
  }
}

TEST(RandomLowRank, ValidAndGenuinelyLowRank) {
  Rng rng(31);
  const LinearMdpModel m = random_low_rank(6, 3, 4, rng, 0.2);
  EXPECT_EQ(m.dim(), 4);
  EXPECT_FALSE(m.is_one_hot());
  EXPECT_TRUE(validate(m).ok());
}

TEST(Serialization, LinearRoundTripIsBitExact) {
  Rng rng(41);
  const LinearMdpModel m = random_low_rank(4, 2, 3, rng, 0.3);
  const LinearMdpModel back = linear_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.features(), m.features());
  EXPECT_EQ(back.measures(), m.measures());
  EXPECT_EQ(back.theta(), m.theta());
  EXPECT_EQ(to_json(back).dump(), to_json(m).dump());
}

TEST(Serialization, TabularRoundTripThroughFile) {
  Rng rng(42);
  const TabularMdp t = random_unichain_tabular(3, 2, rng, 0.2);
  const auto path = std::filesystem::temp_directory_path() / "avgrl_tab_roundtrip.json";
  save_json(to_json(t), path.string());
  const LinearMdpModel m = load_model(path.string());
  const TabularMdp back = to_tabular(m);
  EXPECT_EQ(back.transition(), t.transition());
  EXPECT_EQ(back.reward(), t.reward());
  std::filesystem::remove(path);
}

TEST(Serialization, MalformedDocumentsAreConfigErrors) {
  EXPECT_THROW(linear_from_json(nlohmann::json{{"format", "linmdp-v1"}}), ConfigError);
  EXPECT_THROW(linear_from_json(nlohmann::json{{"format", "other"}}), ConfigError);
  EXPECT_THROW(tabular_from_json(nlohmann::json{{"format", "tabmdp-v1"}, {"num_states", 1}}), ConfigError);
  EXPECT_THROW(load_model("/nonexistent/avgrl.json"), ConfigError);
}

}  // namespace
}  // namespace avgrl
