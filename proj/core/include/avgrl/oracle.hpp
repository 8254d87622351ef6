#pragma once

#include "avgrl/envs.hpp"
#include "avgrl/mathcore.hpp"

#include <optional>

namespace avgrl {

inline constexpr double kOracleTol = 1e-10;
inline constexpr long kOracleMaxIterations = 1'000'000;

/// Average-reward optimality data: gain J*, bias v* (normalized to min 0),
/// q*(s,a) = r + P v* - J* stored row-major as S x A, and sp(v*).
struct OracleSolution {
  double gain = 0.0;
  Vec bias;
  Mat qbias;
  double span = 0.0;
  long iterations = 0;
};

/// Relative value iteration with reference state 0. Iterates on the
/// aperiodic transform P' = (P + I)/2, which has the same gain and whose bias
/// is twice the original, so periodic unichain models converge too.
/// Throws ConvergenceError after kOracleMaxIterations sweeps.
OracleSolution solve_average_reward(const TabularMdp& t, double tol = kOracleTol,
                                    const std::optional<Vec>& initial = std::nullopt);

/// max_{s,a} |J* + q*(s,a) - r(s,a) - [P v*](s,a)|
double bellman_residual(const TabularMdp& t, const OracleSolution& sol);

/// gamma-discounted optimal values by value iteration; stops once successive
/// iterates differ by at most tol*(1-gamma)/(2*gamma) in sup norm.
Vec solve_discounted(const TabularMdp& t, double gamma, double tol = kOracleTol);

double span(const Vec& v);

struct Lemma2Report {
  double sp_discounted = 0.0;
  double sp_bias = 0.0;
  double sp_ratio = 0.0;
  double gain_gap = 0.0;
  bool span_violated = false;
  bool gain_violated = false;
  bool violated() const { return span_violated || gain_violated; }
};

/// Compares sp(V*_gamma) against 2 sp(v*) and (1-gamma) V*_gamma against J*.
/// `check_tol` is the slack allowed on both inequalities.
Lemma2Report check_lemma2(const TabularMdp& t, double gamma, double solver_tol = kOracleTol,
                          double check_tol = 1e-8);

}  // namespace avgrl
