#include "avgrl/oracle.hpp"

#include "avgrl/errors.hpp"

#include <cmath>

namespace avgrl {

namespace {

// One Bellman sweep T v under the half-lazy transform.
Vec lazy_bellman(const TabularMdp& t, const Vec& v) {
  Vec out(t.num_states());
  for (int s = 0; s < t.num_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < t.num_actions(); ++a) {
      best = std::max(best, t.r(s, a) + 0.5 * t.expect(s, a, v) + 0.5 * v[s]);
    }
    out[s] = best;
  }
  return out;
}

}  // namespace

double span(const Vec& v) { return v.size() == 0 ? 0.0 : v.maxCoeff() - v.minCoeff(); }

OracleSolution solve_average_reward(const TabularMdp& t, double tol,
                                    const std::optional<Vec>& initial) {
  if (!(tol > 0.0)) throw ContractViolation("solve_average_reward: tol must be positive");
  const int S = t.num_states();
  const int A = t.num_actions();
  Vec v = initial ? *initial : Vec::Zero(S);
  if (v.size() != S) throw ContractViolation("solve_average_reward: initial vector has wrong length");
  v.array() -= v[0];

  double gain = 0.0;
  long it = 0;
  for (;; ++it) {
    if (it >= kOracleMaxIterations) {
      throw ConvergenceError("relative value iteration did not converge within " +
                             std::to_string(kOracleMaxIterations) +
                             " iterations (environment is likely multichain)");
    }
    const Vec next = lazy_bellman(t, v);
    const Vec inc = next - v;
    const double hi = inc.maxCoeff();
    const double lo = inc.minCoeff();
    v = next.array() - next[0];
    if (hi - lo <= tol) {
      gain = 0.5 * (hi + lo);
      break;
    }
  }

  // Bias of the original chain is half the transformed bias.
  Vec h = 0.5 * v;
  Mat q(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) q(s, a) = t.r(s, a) + t.expect(s, a, h) - gain;
  }
  Vec bias = q.rowwise().maxCoeff();
  const double shift = bias.minCoeff();
  bias.array() -= shift;
  q.array() -= shift;

  OracleSolution sol;
  sol.gain = gain;
  sol.bias = std::move(bias);
  sol.qbias = std::move(q);
  sol.span = span(sol.bias);
  sol.iterations = it + 1;
  return sol;
}

double bellman_residual(const TabularMdp& t, const OracleSolution& sol) {
  double worst = 0.0;
  for (int s = 0; s < t.num_states(); ++s) {
    for (int a = 0; a < t.num_actions(); ++a) {
      const double r = sol.gain + sol.qbias(s, a) - t.r(s, a) - t.expect(s, a, sol.bias);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

Vec solve_discounted(const TabularMdp& t, double gamma, double tol) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ContractViolation("solve_discounted: gamma must lie in [0, 1)");
  }
  const int S = t.num_states();
  const int A = t.num_actions();
  const double stop = gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : 0.0;
  Vec v = Vec::Zero(S);
  for (long it = 0; it < kOracleMaxIterations; ++it) {
    Vec next(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) best = std::max(best, t.r(s, a) + gamma * t.expect(s, a, v));
      next[s] = best;
    }
    const double diff = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (diff <= stop) return v;
  }
  throw ConvergenceError("discounted value iteration did not converge");
}

Lemma2Report check_lemma2(const TabularMdp& t, double gamma, double solver_tol,
                          double check_tol) {
  const OracleSolution sol = solve_average_reward(t, solver_tol);
  const Vec vg = solve_discounted(t, gamma, solver_tol);
  Lemma2Report rep;
  rep.sp_discounted = span(vg);
  rep.sp_bias = sol.span;
  if (sol.span > 0.0) {
    rep.sp_ratio = rep.sp_discounted / sol.span;
  } else {
    rep.sp_ratio = rep.sp_discounted <= check_tol ? 0.0 : std::numeric_limits<double>::infinity();
  }
  rep.gain_gap = ((1.0 - gamma) * vg.array() - sol.gain).abs().maxCoeff();
  rep.span_violated = rep.sp_discounted > 2.0 * sol.span + check_tol;
  rep.gain_violated = rep.gain_gap > (1.0 - gamma) * sol.span + check_tol;
  return rep;
}

}  // namespace avgrl
