#pragma once

#include "avgrl/mathcore.hpp"
#include "avgrl/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace avgrl {

/// Finite MDP with an explicit S x A x S transition table and S x A rewards.
class TabularMdp {
 public:
  TabularMdp(int num_states, int num_actions, std::vector<double> transition,
             std::vector<double> reward);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double p(int s, int a, int next) const {
    return transition_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next];
  }
  double r(int s, int a) const { return reward_[static_cast<std::size_t>(s) * num_actions_ + a]; }

  /// sum_{s'} P(s'|s,a) v(s')
  double expect(int s, int a, const Vec& v) const;

  const std::vector<double>& transition() const { return transition_; }
  const std::vector<double>& reward() const { return reward_; }

 private:
  int num_states_;
  int num_actions_;
  std::vector<double> transition_;
  std::vector<double> reward_;
};

/// Linear MDP over a finite state set: P(s'|s,a) = <phi(s,a), mu(s')>,
/// r(s,a) = <phi(s,a), theta>. Features are stored one row per (s, a) with
/// row index s * num_actions + a; measures are d x S (column s' is mu(s')).
class LinearMdpModel {
 public:
  LinearMdpModel(int num_states, int num_actions, Mat features, Mat measures, Vec theta);

  int dim() const { return static_cast<int>(theta_.size()); }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  Vec phi(int s, int a) const { return features_.row(row(s, a)).transpose(); }
  double reward(int s, int a) const { return features_.row(row(s, a)).dot(theta_); }
  /// The S-vector (<phi(s,a), mu(s')>)_{s'}.
  Vec transition_dist(int s, int a) const;
  /// [P v](s, a) computed from the true measures.
  double expect(int s, int a, const Vec& v) const;

  const Mat& features() const { return features_; }
  const Mat& measures() const { return measures_; }
  const Vec& theta() const { return theta_; }

  /// True when every phi(s,a) is the one-hot vector e_{s*A+a}.
  bool is_one_hot() const;

 private:
  Eigen::Index row(int s, int a) const { return static_cast<Eigen::Index>(s) * num_actions_ + a; }

  int num_states_;
  int num_actions_;
  Mat features_;
  Mat measures_;
  Vec theta_;
};

struct Violation {
  std::string constraint;  // e.g. "feature_norm", "transition_row_sum"
  std::string where;       // e.g. "(s=1,a=0)"
  double magnitude = 0.0;  // the offending quantity
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks feature norms, theta / total-measure norms, that every transition
/// row is a probability vector and that rewards lie in [0, 1].
ValidationReport validate(const LinearMdpModel& m, double tol = 1e-10);
ValidationReport validate(const TabularMdp& t, double tol = 1e-10);

/// One-hot embedding: d = S*A, phi(s,a) = e_{(s,a)}, theta = r, mu_{(s,a)}(s') = P(s'|s,a).
LinearMdpModel embed_tabular(const TabularMdp& t);

/// Explicit transition/reward tables of a linear model (used by oracles).
TabularMdp to_tabular(const LinearMdpModel& m);

/// Inverse-CDF draw from P(.|s,a).
int sample_next(const LinearMdpModel& m, int s, int a, Rng& rng);

/// Rows are normalized exponential draws (a flat Dirichlet) mixed with the
/// uniform distribution at weight epsilon_mix; rewards uniform in [0, 1].
TabularMdp random_unichain_tabular(int num_states, int num_actions, Rng& rng, double epsilon_mix);

/// Genuinely low-rank linear MDP: d atom distributions over states (mixed with
/// uniform at epsilon_mix), features drawn on the probability simplex, theta in
/// [0,1]^d. Validity holds by construction and is re-checked before returning.
LinearMdpModel random_low_rank(int num_states, int num_actions, int dim, Rng& rng,
                               double epsilon_mix);

// Serialization ("linmdp-v1" / "tabmdp-v1").
nlohmann::json to_json(const LinearMdpModel& m);
nlohmann::json to_json(const TabularMdp& t);
LinearMdpModel linear_from_json(const nlohmann::json& j);
TabularMdp tabular_from_json(const nlohmann::json& j);

/// Loads either format from a file; tabular documents are one-hot embedded.
LinearMdpModel load_model(const std::string& path);
void save_json(const nlohmann::json& j, const std::string& path);

}  // namespace avgrl
