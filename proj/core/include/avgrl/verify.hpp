#pragma once

#include "avgrl/agents.hpp"
#include "avgrl/rng.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace avgrl {

/// Absolute slack allowed on every lemma inequality.
inline constexpr double kLemmaTol = 1e-9;

/// Outcome of one mechanical check. `worst_slack` is min(bound - lhs) over
/// all non-vacuous comparisons; negative means at least one violation.
struct CheckReport {
  std::string suite;
  long checked = 0;
  long violations = 0;
  long vacuous = 0;  // comparisons whose bound was +infinity
  double worst_slack = std::numeric_limits<double>::infinity();
  std::optional<std::string> counterexample;
  std::map<std::string, double> metrics;

  double pass_fraction() const {
    return checked == 0 ? 1.0 : static_cast<double>(checked - violations) / static_cast<double>(checked);
  }
  /// Records bound - lhs; returns false on a violation.
  bool record(double slack, double tol = kLemmaTol);
  void merge(const CheckReport& other);
  nlohmann::json to_json() const;
};

/// Which value-iteration indices to visit for a generation covering [lo, hi].
/// Subsampled: {lo, lo+1, midpoint, hi}; full: every index.
std::vector<int> sample_indices(int lo, int hi, bool full);

/// Visited states of the trace plus `extra` random state ids in [0, S).
std::vector<int> default_probes(const std::vector<TransitionRecord>& steps, int num_states, int extra,
                                Rng& rng);

/// The four order/translation properties of Clip on `samples` random tuples.
/// Values live on a dyadic grid so translation is exact in floating point.
CheckReport check_clip_properties(long samples, Rng& rng);

struct NegativeResult {
  double observed = 0.0;   // |<w_n, e_1>|
  double predicted = 0.0;  // Delta * sqrt(n) / 2 (n even), Delta * sqrt(n-1) / 2 (n odd)
  double relative_error() const;
};

/// Builds the two-cluster design phi = (eta, +-1/2, 0...) with eta = 1/sqrt(n),
/// targets all Delta, lambda = 1, and fits w through PsdMatrixState + fit_weight.
/// Odd n appends one zero feature.
NegativeResult negative_construction(long n, double delta, int dim = 2);

/// |V~^{t+1}_u(s) - V~^t_u(s)| and |V^{t+1}_u(s) - V^t_u(s)| against
/// m_{t-1} - m_{t+1} for t in [1, T-1], u in [t+1, T]. Needs recorded
/// generations. Also counts inverted clip bounds (L > U) as a metric.
CheckReport check_deviation(const DcTrace& trace, std::span<const int> probes, bool full_u = false);

/// Threshold monotonicity, m_t <= 1/(1-gamma), Q~ <= 1/(1-gamma) and
/// V in [m_t, m_t + H] on sampled (t, u, probe, a).
CheckReport check_dc_invariants(const DcTrace& trace, std::span<const int> probes, bool full_u = false);

/// V^t_{t+1}(s_{t+1}) <= V~^{t+1}_{t+1}(s_{t+1}) + 2 (m_{t-1} - m_{t+1}).
CheckReport check_threshold_ordering(const DcTrace& trace);

/// Fraction of sampled (t, u, s) with V^t_u(s) >= V*_gamma(s) - tol.
CheckReport check_optimism(const DcTrace& trace, const Vec& v_star_gamma, bool full_u = false);

/// Q^t_u(s,a) <= r + gamma [P V^t_{u+1}](s,a) + 2 beta ||phi||_{Lambda_t^{-1}} + 2 (m_{t-3} - m_t)
/// for t >= 4, sampled u and every (s, a) visited during the run. [P V] uses
/// the true measures.
CheckReport check_step_upper_bound(const DcTrace& trace, bool full_u = false);

/// Within-episode deviation of the tabular agent: bound m_t - m_{t+1}, all
/// states, all u in [t+1, T]. include_episode_boundaries=true also compares
/// pairs that straddle an episode change (outside the lemma's scope; used as a
/// negative control for the checker).
CheckReport check_tabular_deviation(const TabularTrace& trace, bool include_episode_boundaries = false);

/// Threshold monotonicity, caps and V in [m_t, m_t + H] for the tabular agent.
CheckReport check_tabular_invariants(const TabularTrace& trace);

/// sum_{i<=t} phi_i' Lambda_i^{-1} phi_i <= 2 d log(1 + t) for every prefix t.
CheckReport check_elliptical_potential(std::span<const double> potential, int dim);

/// R_t = sum_{tau <= t} (J* - r_tau).
std::vector<double> regret_curve(std::span<const TransitionRecord> steps, double gain);

}  // namespace avgrl
