#include "avgrl/verify.hpp"

#include "avgrl/errors.hpp"
#include "avgrl/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace avgrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Dyadic grid value k / 1024 with |k| <= 2^20; sums of two such values are exact.
double grid_value(Rng& rng) {
  const auto k = static_cast<double>(rng.below(2u * 1048576u + 1u)) - 1048576.0;
  return k / 1024.0;
}

std::vector<std::pair<int, int>> visited_pairs(const std::vector<TransitionRecord>& steps) {
  std::set<std::pair<int, int>> seen;
  for (const auto& st : steps) seen.emplace(st.s, st.a);
  return {seen.begin(), seen.end()};
}

long count_inverted(const ChainView& c, const LinearMdpModel& model, int u, int s) {
  long n = 0;
  for (int a = 0; a < model.num_actions(); ++a) {
    const QParts p = c.q_parts(u, model.phi(s, a), model.reward(s, a));
    if (p.lower > p.upper + kLemmaTol) ++n;
  }
  return n;
}

}  // namespace

bool CheckReport::record(double slack, double tol) {
  ++checked;
  worst_slack = std::min(worst_slack, slack);
  if (slack < -tol) {
    ++violations;
    return false;
  }
  return true;
}

void CheckReport::merge(const CheckReport& other) {
  checked += other.checked;
  violations += other.violations;
  vacuous += other.vacuous;
  worst_slack = std::min(worst_slack, other.worst_slack);
  if (!counterexample && other.counterexample) counterexample = other.counterexample;
  for (const auto& [k, v] : other.metrics) metrics[k] += v;
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["checked"] = checked;
  j["violations"] = violations;
  j["worst_slack"] = std::isfinite(worst_slack) ? nlohmann::json(worst_slack) : nlohmann::json(nullptr);
  j["pass_fraction"] = pass_fraction();
  if (vacuous > 0) j["vacuous"] = vacuous;
  if (counterexample) j["counterexample"] = *counterexample;
  if (!metrics.empty()) j["metrics"] = metrics;
  return j;
}

std::vector<int> sample_indices(int lo, int hi, bool full) {
  std::vector<int> out;
  if (lo > hi) return out;
  if (full) {
    for (int u = lo; u <= hi; ++u) out.push_back(u);
    return out;
  }
  for (int u : {lo, lo + 1, lo + (hi - lo) / 2, hi}) {
    if (u >= lo && u <= hi && std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> default_probes(const std::vector<TransitionRecord>& steps, int num_states, int extra,
                                Rng& rng) {
  std::set<int> probes;
  for (const auto& st : steps) {
    probes.insert(st.s);
    probes.insert(st.s_next);
  }
  for (int i = 0; i < extra; ++i) {
    probes.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(num_states))));
  }
  return {probes.begin(), probes.end()};
}

CheckReport check_clip_properties(long samples, Rng& rng) {
  CheckReport rep;
  rep.suite = "clip";
  for (long i = 0; i < samples; ++i) {
    const double x = grid_value(rng);
    const double y = grid_value(rng);
    const double c = grid_value(rng);
    double lo = grid_value(rng);
    double hi = grid_value(rng);
    if (lo > hi) std::swap(lo, hi);
    double lo2 = grid_value(rng);
    double hi2 = grid_value(rng);
    if (lo2 > hi2) std::swap(lo2, hi2);

    // (i) translation equivariance
    const double lhs = clip(x, lo, hi);
    const double shifted = clip(x - c, lo - c, hi - c) + c;
    if (!rep.record(lhs == shifted ? 0.0 : -std::abs(lhs - shifted), 0.0) && !rep.counterexample) {
      rep.counterexample = "translation: x=" + fmt(x) + " c=" + fmt(c);
    }
    // (ii) monotone in x
    const double small = std::min(x, y);
    const double large = std::max(x, y);
    rep.record(clip(large, lo, hi) - clip(small, lo, hi), 0.0);
    // (iii) Clip(x) <= x  <=>  x >= lo
    const bool below = clip(x, lo, hi) <= x;
    rep.record(below == (x >= lo) ? 0.0 : -1.0, 0.0);
    // (iv) monotone in both bounds: (lo, hi) >= (lo2', hi2')
    const double dl = std::abs(grid_value(rng));
    const double dh = std::abs(grid_value(rng));
    const double lo_big = lo2 + dl;
    const double hi_big = std::max(hi2 + dh, lo_big);
    rep.record(clip(x, lo_big, hi_big) - clip(x, lo2, hi2), 0.0);
  }
  return rep;
}

double NegativeResult::relative_error() const {
  if (predicted == 0.0) return std::abs(observed);
  return std::abs(observed - predicted) / std::abs(predicted);
}

NegativeResult negative_construction(long n, double delta, int dim) {
  if (n < 1) throw ContractViolation("negative_construction: n must be positive");
  if (dim < 2) throw ContractViolation("negative_construction: needs d >= 2");
  const long half = n / 2;
  const long paired = 2 * half;
  NegativeResult out;
  if (paired == 0) return out;
  const double eta = 1.0 / std::sqrt(static_cast<double>(paired));
  PsdMatrixState cov(static_cast<std::size_t>(dim), 1.0);
  FeatureLog feats(dim);
  Vec up = Vec::Zero(dim);
  up[0] = eta;
  up[1] = 0.5;
  Vec down = up;
  down[1] = -0.5;
  for (long i = 0; i < half; ++i) {
    cov.rank1_update(up);
    feats.append(up);
  }
  for (long i = 0; i < half; ++i) {
    cov.rank1_update(down);
    feats.append(down);
  }
  if (paired < n) {
    const Vec zero = Vec::Zero(dim);
    cov.rank1_update(zero);
    feats.append(zero);
  }
  const std::vector<double> targets(static_cast<std::size_t>(n), delta);
  const FittedWeight fw = fit_weight(cov, feats, RegressionTarget{targets, 0.0});
  Vec e1 = Vec::Zero(dim);
  e1[0] = 1.0;
  out.observed = std::abs(phat_eval(fw, e1));
  out.predicted = delta * std::sqrt(static_cast<double>(paired)) / 2.0;
  return out;
}

CheckReport check_deviation(const DcTrace& trace, std::span<const int> probes, bool full_u) {
  CheckReport rep;
  rep.suite = "deviation";
  const LinearMdpModel& model = *trace.model;
  const int T = trace.horizon();
  long inverted = 0;
  long clip_evals = 0;
  for (int t = 1; t < T; ++t) {
    const ChainView c0 = trace.chain(t);
    const ChainView c1 = trace.chain(t + 1);
    const double bound = threshold_gap(trace.m(t - 1), trace.m(t + 1));
    for (int u : sample_indices(t + 1, T, full_u)) {
      for (int s : probes) {
        if (trace.deviation_clip) {
          inverted += count_inverted(c1, model, u, s);
          clip_evals += model.num_actions();
        }
        const VPair v0 = c0.v(u, model, s);
        const VPair v1 = c1.v(u, model, s);
        if (!std::isfinite(bound)) {
          rep.vacuous += 2;
          continue;
        }
        const double dev_tilde = std::abs(v1.vtilde - v0.vtilde);
        const double dev = std::abs(v1.v - v0.v);
        const bool ok = rep.record(bound - dev_tilde) & rep.record(bound - dev);
        if (!ok && !rep.counterexample) {
          rep.counterexample = "t=" + std::to_string(t) + " u=" + std::to_string(u) +
                               " s=" + std::to_string(s) + " V~^t=" + fmt(v0.vtilde) +
                               " V~^{t+1}=" + fmt(v1.vtilde) + " V^t=" + fmt(v0.v) +
                               " V^{t+1}=" + fmt(v1.v) + " bound=" + fmt(bound);
        }
      }
    }
  }
  rep.metrics["inverted_clip_bounds"] = static_cast<double>(inverted);
  rep.metrics["clip_evaluations"] = static_cast<double>(clip_evals);
  rep.metrics["probes"] = static_cast<double>(probes.size());
  return rep;
}

CheckReport check_dc_invariants(const DcTrace& trace, std::span<const int> probes, bool full_u) {
  CheckReport rep;
  rep.suite = "dc-invariants";
  const LinearMdpModel& model = *trace.model;
  const int T = trace.horizon();
  const double cap = trace.config.cap();
  const double H = trace.config.H;
  for (int t = 1; t <= T; ++t) {
    const double m_t = trace.m(t).value();
    if (!rep.record(m_t - trace.m(t + 1).value(), 0.0) && !rep.counterexample) {
      rep.counterexample = "threshold increased at t=" + std::to_string(t);
    }
    rep.record(cap - m_t, 0.0);
    const ChainView c = trace.chain(t);
    for (int u : sample_indices(t, T, full_u)) {
      for (int s : probes) {
        for (int a = 0; a < model.num_actions(); ++a) {
          const QParts p = c.q_parts(u, model.phi(s, a), model.reward(s, a));
          rep.record(cap - p.qtilde, 0.0);
          rep.record(cap - p.q, 0.0);
        }
        const VPair v = c.v(u, model, s);
        rep.record(cap - v.vtilde, 0.0);
        const bool ok = rep.record(v.v - m_t, 0.0) & rep.record(m_t + H - v.v, 0.0);
        if (!ok && !rep.counterexample) {
          rep.counterexample = "V out of [m_t, m_t+H] at t=" + std::to_string(t) +
                               " u=" + std::to_string(u) + " s=" + std::to_string(s);
        }
      }
    }
  }
  return rep;
}

CheckReport check_threshold_ordering(const DcTrace& trace) {
  CheckReport rep;
  rep.suite = "threshold-ordering";
  const LinearMdpModel& model = *trace.model;
  const int T = trace.horizon();
  for (int t = 1; t < T; ++t) {
    const int s_next = trace.steps.at(static_cast<std::size_t>(t - 1)).s_next;
    const double gap = threshold_gap(trace.m(t - 1), trace.m(t + 1));
    if (!std::isfinite(gap)) {
      ++rep.vacuous;
      continue;
    }
    const double lhs = trace.chain(t).v(t + 1, model, s_next).v;
    const double rhs = trace.chain(t + 1).v(t + 1, model, s_next).vtilde + 2.0 * gap;
    if (!rep.record(rhs - lhs) && !rep.counterexample) {
      rep.counterexample = "t=" + std::to_string(t) + " lhs=" + fmt(lhs) + " rhs=" + fmt(rhs);
    }
  }
  return rep;
}

CheckReport check_optimism(const DcTrace& trace, const Vec& v_star_gamma, bool full_u) {
  CheckReport rep;
  rep.suite = "optimism";
  const LinearMdpModel& model = *trace.model;
  const int T = trace.horizon();
  for (int t = 1; t <= T; ++t) {
    const ChainView c = trace.chain(t);
    for (int u : sample_indices(t, T, full_u)) {
      for (int s = 0; s < model.num_states(); ++s) {
        const double v = c.v(u, model, s).v;
        if (!rep.record(v - v_star_gamma[s]) && !rep.counterexample) {
          rep.counterexample = "t=" + std::to_string(t) + " u=" + std::to_string(u) +
                               " s=" + std::to_string(s) + " V=" + fmt(v) +
                               " V*=" + fmt(v_star_gamma[s]);
        }
      }
    }
  }
  return rep;
}

CheckReport check_step_upper_bound(const DcTrace& trace, bool full_u) {
  CheckReport rep;
  rep.suite = "step-bound";
  const LinearMdpModel& model = *trace.model;
  const int T = trace.horizon();
  const int S = model.num_states();
  const double cap = trace.config.cap();
  const double gamma = trace.config.gamma;
  const double beta = trace.config.beta;
  const auto pairs = visited_pairs(trace.steps);
  for (int t = 4; t <= T; ++t) {
    const ChainView c = trace.chain(t);
    const Generation& g = trace.generation(t);
    const double drift = 2.0 * threshold_gap(trace.m(t - 3), trace.m(t));
    for (int u : sample_indices(t, T, full_u)) {
      Vec v_next(S);
      for (int s = 0; s < S; ++s) v_next[s] = u + 1 > T ? cap : c.v(u + 1, model, s).v;
      for (const auto& [s, a] : pairs) {
        const Vec phi = model.phi(s, a);
        const double q = c.q_parts(u, phi, model.reward(s, a)).q;
        const double rhs = model.reward(s, a) + gamma * model.expect(s, a, v_next) +
                           2.0 * beta * g.bonus(phi) + drift;
        if (!rep.record(rhs - q) && !rep.counterexample) {
          rep.counterexample = "t=" + std::to_string(t) + " u=" + std::to_string(u) +
                               " s=" + std::to_string(s) + " a=" + std::to_string(a) +
                               " Q=" + fmt(q) + " rhs=" + fmt(rhs);
        }
      }
    }
  }
  return rep;
}

CheckReport check_tabular_deviation(const TabularTrace& trace, bool include_episode_boundaries) {
  CheckReport rep;
  rep.suite = include_episode_boundaries ? "tabular-deviation-all-pairs" : "tabular-deviation";
  const int T = trace.config.horizon;
  if (trace.generations.size() < static_cast<std::size_t>(T)) {
    throw ContractViolation("check_tabular_deviation: generations were not recorded");
  }
  long skipped = 0;
  for (int t = 1; t < T; ++t) {
    const auto ti = static_cast<std::size_t>(t - 1);
    if (!include_episode_boundaries && trace.episode_of_step[ti] != trace.episode_of_step[ti + 1]) {
      ++skipped;
      continue;
    }
    const double bound = trace.thresholds[ti] - trace.thresholds[ti + 1];
    const TabularGeneration& g0 = trace.generations[ti];
    const TabularGeneration& g1 = trace.generations[ti + 1];
    for (int u = t + 1; u <= T; ++u) {
      const auto i0 = static_cast<std::size_t>(u - t);
      const auto i1 = static_cast<std::size_t>(u - t - 1);
      for (int s = 0; s < trace.num_states; ++s) {
        const double dt = std::abs(g1.vtilde[i1][s] - g0.vtilde[i0][s]);
        const double dv = std::abs(g1.v[i1][s] - g0.v[i0][s]);
        const bool ok = rep.record(bound - dt) & rep.record(bound - dv);
        if (!ok && !rep.counterexample) {
          rep.counterexample = "t=" + std::to_string(t) + " u=" + std::to_string(u) +
                               " s=" + std::to_string(s) + " dev~=" + fmt(dt) + " dev=" + fmt(dv) +
                               " bound=" + fmt(bound);
        }
      }
    }
  }
  rep.metrics["episode_boundary_pairs_skipped"] = static_cast<double>(skipped);
  return rep;
}

CheckReport check_tabular_invariants(const TabularTrace& trace) {
  CheckReport rep;
  rep.suite = "tabular-invariants";
  const double cap = trace.config.cap();
  const double H = trace.config.H;
  for (std::size_t i = 0; i + 1 < trace.thresholds.size(); ++i) {
    rep.record(trace.thresholds[i] - trace.thresholds[i + 1], 0.0);
    rep.record(cap - trace.thresholds[i], 0.0);
  }
  for (const TabularGeneration& g : trace.generations) {
    for (std::size_t i = 0; i < g.q.size(); ++i) {
      rep.record(cap - g.q[i].maxCoeff(), 0.0);
      rep.record(cap - g.vtilde[i].maxCoeff(), 0.0);
      rep.record(g.v[i].minCoeff() - g.m, 0.0);
      rep.record(g.m + H - g.v[i].maxCoeff(), 0.0);
    }
  }
  return rep;
}

CheckReport check_elliptical_potential(std::span<const double> potential, int dim) {
  CheckReport rep;
  rep.suite = "elliptical-potential";
  double acc = 0.0;
  for (std::size_t i = 0; i < potential.size(); ++i) {
    acc += potential[i];
    const double bound = 2.0 * dim * std::log(1.0 + static_cast<double>(i + 1));
    rep.record(bound - acc);
  }
  return rep;
}

std::vector<double> regret_curve(std::span<const TransitionRecord> steps, double gain) {
  std::vector<double> out;
  out.reserve(steps.size());
  double acc = 0.0;
  for (const auto& st : steps) {
    acc += gain - st.r;
    out.push_back(acc);
  }
  return out;
}

}  // namespace avgrl
