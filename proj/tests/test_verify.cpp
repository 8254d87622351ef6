#include "avgrl/errors.hpp"
#include "avgrl/harness.hpp"
#include "avgrl/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace avgrl {
namespace {

ResolvedEnv builtin(const std::string& name) {
  EnvSpec spec;
  spec.kind = "builtin";
  spec.name = name;
  return resolve_env(spec);
}

TEST(CheckReport, RecordAndMerge) {
  CheckReport a;
  EXPECT_TRUE(a.record(0.5));
  EXPECT_TRUE(a.record(-1e-10));
  EXPECT_FALSE(a.record(-1e-3));
  EXPECT_EQ(a.checked, 3);
  EXPECT_EQ(a.violations, 1);
  EXPECT_EQ(a.worst_slack, -1e-3);
  CheckReport b;
  b.record(2.0);
  b.vacuous = 4;
  a.merge(b);
  EXPECT_EQ(a.checked, 4);
  EXPECT_EQ(a.vacuous, 4);
  EXPECT_DOUBLE_EQ(a.pass_fraction(), 0.75);
  const auto j = a.to_json();
  for (const char* key : {"suite", "checked", "violations", "worst_slack", "pass_fraction"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(SampleIndices, SubsampleAndFull) {
  EXPECT_EQ(sample_indices(3, 10, false), (std::vector<int>{3, 4, 6, 10}));
  EXPECT_EQ(sample_indices(5, 5, false), (std::vector<int>{5}));
  EXPECT_EQ(sample_indices(5, 6, false), (std::vector<int>{5, 6}));
  EXPECT_EQ(sample_indices(2, 5, true), (std::vector<int>{2, 3, 4, 5}));
  EXPECT_TRUE(sample_indices(6, 5, true).empty());
}

TEST(ClipProperties, HoldExactly) {
  Rng rng(1);
  const CheckReport r = check_clip_properties(20000, rng);
  EXPECT_EQ(r.violations, 0);
  EXPECT_GT(r.checked, 0);
}

TEST(NegativeConstruction, SmallCaseIsExact) {
  const NegativeResult r = negative_construction(4, 1.0);
  EXPECT_NEAR(r.observed, 1.0, 1e-12);
  EXPECT_EQ(r.predicted, 1.0);
}

TEST(NegativeConstruction, MatchesClosedForm) {
  EXPECT_NEAR(negative_construction(100, 0.1).observed, 0.5, 1e-10);
  const NegativeResult big = negative_construction(10000, 10.0);
  EXPECT_EQ(big.predicted, 500.0);
  EXPECT_LE(big.relative_error(), 1e-9);
}

TEST(NegativeConstruction, OddCountPadsWithZeroFeature) {
  const NegativeResult r = negative_construction(101, 1.0);
  EXPECT_NEAR(r.predicted, 5.0, 1e-15);
  EXPECT_LE(r.relative_error(), 1e-9);
  EXPECT_THROW(negative_construction(0, 1.0), ContractViolation);
}

TEST(NegativeConstruction, HigherDimensionIsIdentical) {
  EXPECT_NEAR(negative_construction(64, 2.0, 5).observed, 8.0, 1e-10);
}

TEST(Deviation, EarlyStepsAreVacuous) {
  const ResolvedEnv env = builtin("two-state");
  AgentConfig cfg;
  cfg.gamma = 0.9;
  cfg.H = 2.0;
  cfg.beta = 0.2;
  cfg.horizon = 3;
  const DcTrace tr = record_dc_run(env, cfg, 1);
  const std::vector<int> probes{0, 1};
  const CheckReport r = check_deviation(tr, probes, true);
  // t = 1 compares against m_0 - m_2 = +infinity.
  EXPECT_GT(r.vacuous, 0);
}

TEST(Deviation, ConstantRewardEnvHasNoViolations) {
  const ResolvedEnv env = builtin("constant");
  AgentConfig cfg;
  cfg.gamma = 0.9;
  cfg.H = 1.0;
  cfg.beta = 0.0;
  cfg.horizon = 40;
  const DcTrace tr = record_dc_run(env, cfg, 2);
  const std::vector<int> probes{0, 1};
  EXPECT_EQ(check_dc_invariants(tr, probes, true).violations, 0);
}

TEST(Deviation, RemovingTheClipIsDetected) {
  const ResolvedEnv env = builtin("river");
  const AgentConfig cfg = theory_config(100, env.oracle.span, env.model->dim(), 0.01, 0.1);
  const DcTrace tr = record_dc_run(env, cfg, 3, DcVariant::kNoDeviationClip);
  const std::vector<int> probes{0, 1, 2};
  const CheckReport r = check_deviation(tr, probes, true);
  EXPECT_GT(r.violations, 0);
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_NE(r.counterexample->find("t="), std::string::npos);
}

TEST(Invariants, HoldOnFaithfulRuns) {
  const ResolvedEnv env = builtin("river");
  const AgentConfig cfg = theory_config(120, env.oracle.span, env.model->dim(), 0.01, 0.1);
  const DcTrace tr = record_dc_run(env, cfg, 4);
  const std::vector<int> probes{0, 1, 2};
  EXPECT_EQ(check_dc_invariants(tr, probes).violations, 0);
  EXPECT_EQ(check_elliptical_potential(tr.potential, env.model->dim()).violations, 0);
}

TEST(Optimism, HugeBonusIsAlwaysOptimisticAndZeroBonusIsNot) {
  const ResolvedEnv env = builtin("river");
  AgentConfig cfg = theory_config(150, env.oracle.span, env.model->dim(), 0.01, 0.1);
  const Vec vstar = solve_discounted(env.tabular, cfg.gamma);
  cfg.beta = 1e3;
  EXPECT_EQ(check_optimism(record_dc_run(env, cfg, 5), vstar).violations, 0);
  cfg.beta = 0.0;
  EXPECT_GT(check_optimism(record_dc_run(env, cfg, 5), vstar).violations, 0);
}

TEST(StepUpperBound, LargeBonusHoldsEverywhere) {
  const ResolvedEnv env = builtin("river");
  AgentConfig cfg = theory_config(120, env.oracle.span, env.model->dim(), 0.01, 0.1);
  cfg.beta = 50.0;
  const CheckReport r = check_step_upper_bound(record_dc_run(env, cfg, 6));
  EXPECT_EQ(r.violations, 0);
  EXPECT_GT(r.checked, 0);
}

TEST(TabularDeviation, WithinEpisodeBoundHolds) {
  const ResolvedEnv env = builtin("river");
  const AgentConfig cfg = theory_config(150, env.oracle.span, env.model->dim(), 0.05, 0.1);
  const TabularTrace tr = record_tabular_run(env, cfg, 7);
  EXPECT_EQ(check_tabular_deviation(tr).violations, 0);
  EXPECT_EQ(check_tabular_invariants(tr).violations, 0);
}

TEST(TabularDeviation, ConstantEnvIsTrivial) {
  const ResolvedEnv env = builtin("constant");
  AgentConfig cfg;
  cfg.gamma = 0.9;
  cfg.horizon = 60;
  cfg.beta = 0.0;
  const TabularTrace tr = record_tabular_run(env, cfg, 8);
  EXPECT_EQ(check_tabular_deviation(tr).violations, 0);
}

TEST(RegretCurve, ConstantRewardIsExactlyZero) {
  const ResolvedEnv env = builtin("constant");
  AgentSpec spec;
  spec.algorithm = "random";
  spec.T = 50;
  const RunResult r = simulate(env, spec, 1);
  for (double v : regret_curve(r.steps, r.gain)) EXPECT_EQ(v, 0.0);
}

TEST(RegretCurve, OptimalPlayOnDeterministicEnvIsFlat) {
  // two-state: action 0 is optimal everywhere; starting in state 1 costs one step.
  const ResolvedEnv env = builtin("two-state");
  std::vector<TransitionRecord> steps;
  int s = 1;
  for (int t = 1; t <= 30; ++t) {
    const double r = env.model->reward(s, 0);
    steps.push_back({t, s, 0, r, 0});
    s = 0;
  }
  const auto curve = regret_curve(steps, env.oracle.gain);
  EXPECT_NEAR(curve.back(), 1.0, 1e-9);
  EXPECT_LE(curve.back(), env.oracle.span + 1e-9);
  EXPECT_NEAR(curve[10], curve.back(), 1e-9);
}

TEST(RegretCurve, RandomPlayGrowsLinearly) {
  const ResolvedEnv env = builtin("river");
  AgentSpec spec;
  spec.algorithm = "random";
  spec.T = 2000;
  const RunResult r = simulate(env, spec, 3);
  const auto curve = regret_curve(r.steps, r.gain);
  EXPECT_EQ(curve.back(), r.regret);
  EXPECT_GT(curve.back(), 0.3 * 2000);
  EXPECT_GT(curve[1999] - curve[999], 0.3 * 1000);
}

}  // namespace
}  // namespace avgrl
