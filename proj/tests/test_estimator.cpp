#include "avgrl/errors.hpp"
#include "avgrl/estimator.hpp"
#include "avgrl/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace avgrl {
namespace {

TEST(FitWeight, NoTransitionsGivesZeroWeight) {
  PsdMatrixState cov(3, 1.0);
  FeatureLog feats(3);
  const std::vector<double> y;
  const FittedWeight fw = fit_weight(cov, feats, {y, 4.0});
  EXPECT_EQ(fw.w, Vec::Zero(3));
  EXPECT_EQ(fw.anchor, 4.0);
  EXPECT_EQ(phat_eval(fw, Vec::Ones(3)), 4.0);
}

TEST(FitWeight, OneTransitionHandSolve) {
  PsdMatrixState cov(2, 1.0);
  FeatureLog feats(2);
  const Vec e1 = Vec::Unit(2, 0);
  cov.rank1_update(e1);
  feats.append(e1);
  const std::vector<double> y{2.5};
  const FittedWeight fw = fit_weight(cov, feats, {y, 2.0});
  EXPECT_NEAR(fw.w[0], 0.25, 1e-15);
  EXPECT_NEAR(fw.w[1], 0.0, 1e-15);
  EXPECT_NEAR(phat_eval(fw, e1), 2.25, 1e-15);
}

TEST(FitWeight, TargetsEqualToAnchorGiveZeroWeight) {
  Rng rng(5);
  PsdMatrixState cov(3, 1.0);
  FeatureLog feats(3);
  for (int i = 0; i < 20; ++i) {
    Vec phi(3);
    phi << rng.uniform(), rng.uniform(), rng.uniform();
    phi /= 2.0;
    cov.rank1_update(phi);
    feats.append(phi);
  }
  const std::vector<double> y(20, 1.7);
  EXPECT_EQ(fit_weight(cov, feats, {y, 1.7}).w, Vec::Zero(3));
}

TEST(FitWeight, LengthMismatchIsAContractViolation) {
  PsdMatrixState cov(2, 1.0);
  FeatureLog feats(2);
  feats.append(Vec::Unit(2, 0));
  const std::vector<double> y{1.0, 2.0};
  EXPECT_THROW(fit_weight(cov, feats, {y, 0.0}), ContractViolation);
  EXPECT_THROW(fit_weight(cov.inv(), feats, {y, 0.0}), ContractViolation);
}

TEST(FitWeight, TabularOneHotRatio) {
  // n visits to (s,a), all to s' with V(s') = v: phat = n/(n+lambda) (v - anchor) + anchor.
  for (int n : {1, 2, 7}) {
    PsdMatrixState cov(4, 1.0);
    FeatureLog feats(4);
    const Vec e = Vec::Unit(4, 2);
    for (int i = 0; i < n; ++i) {
      cov.rank1_update(e);
      feats.append(e);
    }
    const std::vector<double> y(static_cast<std::size_t>(n), 3.0);
    const double got = phat_eval(fit_weight(cov, feats, {y, 2.0}), e);
    EXPECT_NEAR(got, n / (n + 1.0) * (3.0 - 2.0) + 2.0, 1e-14);
  }
}

TEST(FitWeight, WeightNormBound) {
  Rng rng(9);
  const int d = 4;
  const double H = 2.0;
  for (double lambda : {0.5, 1.0, 3.0}) {
    PsdMatrixState cov(d, lambda);
    FeatureLog feats(d);
    std::vector<double> y;
    const double anchor = 1.0;
    for (int t = 1; t <= 300; ++t) {
      Vec phi(d);
      for (int k = 0; k < d; ++k) phi[k] = 2.0 * rng.uniform() - 1.0;
      phi /= std::max(1.0, phi.norm());
      cov.rank1_update(phi);
      feats.append(phi);
      y.push_back(anchor + H * (2.0 * rng.uniform() - 1.0));
      const FittedWeight fw = fit_weight(cov, feats, {y, anchor});
      ASSERT_LE(fw.w.norm(), H * std::sqrt(d * t / lambda) + 1e-12);
    }
  }
}

TEST(FitWeight, ConstantShiftMovesEstimateByExactlyThatShift) {
  Rng rng(2);
  PsdMatrixState cov(3, 1.0);
  FeatureLog feats(3);
  std::vector<double> y, y_shift;
  const double c = 0.75;  // dyadic, so the shift is exact
  for (int i = 0; i < 30; ++i) {
    Vec phi(3);
    phi << rng.uniform(), rng.uniform(), rng.uniform();
    phi /= phi.norm();
    cov.rank1_update(phi);
    feats.append(phi);
    const double v = std::floor(rng.uniform() * 64.0) / 16.0;
    y.push_back(v);
    y_shift.push_back(v + c);
  }
  const Vec probe = Vec::Constant(3, 0.5);
  const double a = phat_eval(fit_weight(cov, feats, {y, 1.0}), probe);
  const double b = phat_eval(fit_weight(cov, feats, {y_shift, 1.0 + c}), probe);
  EXPECT_NEAR(b - a, c, 1e-12);
}

TEST(FitWeight, PrefixUsesOnlyFirstRows) {
  PsdMatrixState cov(2, 1.0);
  FeatureLog feats(2);
  feats.append(Vec::Unit(2, 0));
  feats.append(Vec::Unit(2, 1));
  cov.rank1_update(Vec::Unit(2, 0));
  const std::vector<double> y{3.0};
  const FittedWeight fw = fit_weight(cov.inv(), feats, {y, 1.0});
  EXPECT_NEAR(fw.w[0], 1.0, 1e-15);
  EXPECT_EQ(fw.w[1], 0.0);
}

}  // namespace
}  // namespace avgrl
