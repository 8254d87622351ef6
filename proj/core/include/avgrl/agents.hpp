#pragma once

#include "avgrl/envs.hpp"
#include "avgrl/estimator.hpp"
#include "avgrl/mathcore.hpp"
#include "avgrl/rng.hpp"

#include <memory>
#include <string>
#include <vector>

namespace avgrl {

struct AgentConfig {
  double gamma = 0.9;
  double lambda = 1.0;
  double H = 1.0;      // span parameter
  double beta = 0.0;   // bonus factor
  int horizon = 1;     // T

  double cap() const { return 1.0 / (1.0 - gamma); }
  /// Throws ContractViolation on out-of-range parameters.
  void check() const;
};

/// gamma = 1 - sqrt(1/T)
double theory_gamma(int horizon);
/// 2 * c_beta * sp(v*) * d * sqrt(log(d T / delta))
double theory_beta(double c_beta, double bias_span, int dim, int horizon, double delta);
/// gamma = 1 - sqrt(1/T), lambda = 1, H = 2 sp(v*), beta = theory_beta(...)
AgentConfig theory_config(int horizon, double bias_span, int dim, double c_beta, double delta);

/// Value functions produced by one planning pass at step t, held in closed
/// form: one fitted weight per u in [t:T] plus the Lambda_t^{-1} snapshot.
/// Sentinel generations (t <= 0) evaluate to 1/(1-gamma) everywhere.
class Generation {
 public:
  static std::shared_ptr<const Generation> sentinel(int t, const AgentConfig& cfg);

  Generation(int t, const AgentConfig& cfg, ExtendedThreshold m_self,
             std::shared_ptr<const Mat> cov_inv);

  int t() const { return t_; }
  int horizon() const { return horizon_; }
  bool is_sentinel() const { return cov_inv_ == nullptr; }
  const ExtendedThreshold& m_self() const { return m_self_; }
  double cap() const { return cap_; }
  double beta() const { return beta_; }
  const std::shared_ptr<const Mat>& cov_inv() const { return cov_inv_; }

  /// ||phi||_{Lambda_t^{-1}}; zero for sentinels.
  double bonus(const Vec& phi) const;

  /// min(r + gamma * (<phi, w_u> + anchor_u + beta * bonus), 1/(1-gamma)).
  double qtilde(int u, const Vec& phi, double reward) const;
  /// Same, with ||phi||_{Lambda_t^{-1}} supplied by the caller.
  double qtilde(int u, const Vec& phi, double reward, double bonus) const;

  const FittedWeight& weight(int u) const;
  bool has_weight(int u) const;
  void set_weight(int u, FittedWeight fw);

 private:
  void check_index(int u) const;

  int t_;
  int horizon_;
  double gamma_;
  double beta_;
  double cap_;
  ExtendedThreshold m_self_;
  std::shared_ptr<const Mat> cov_inv_;
  std::vector<FittedWeight> weights_;  // index u - t
  std::vector<char> filled_;
};

using GenerationPtr = std::shared_ptr<const Generation>;

/// m_{t-2}, m_{t-1}, m_t as seen by the planning pass at step t.
struct ThresholdWindow {
  ExtendedThreshold m_tm2;
  ExtendedThreshold m_tm1;
  ExtendedThreshold m_t;
};

/// Intermediate quantities of one Q^t_u(s,a) evaluation.
struct QParts {
  double qtilde = 0.0;
  double lower = 0.0;  // L^t_u
  double upper = 0.0;  // U^t_u
  double q = 0.0;      // Clip(qtilde; L, U)
};

struct VPair {
  double vtilde = 0.0;
  double v = 0.0;
};

/// Read-only evaluator of the chain {Q~, Q, V~, V}^t_u defined by the current
/// generation, the two before it and the threshold window. With
/// deviation_clip=false, Q = Q~ (the ablation used as a negative control).
class ChainView {
 public:
  ChainView(const Generation& cur, const Generation& prev1, const Generation& prev2,
            ThresholdWindow m, double H, bool deviation_clip = true);

  int t() const { return cur_->t(); }
  const Generation& current() const { return *cur_; }
  const ThresholdWindow& thresholds() const { return m_; }

  QParts q_parts(int u, const Vec& phi, double reward) const;
  /// Bonuses of (cur, prev1, prev2) supplied by the caller.
  QParts q_parts(int u, const Vec& phi, double reward, const double bonus[3]) const;
  double q(int u, const LinearMdpModel& model, int s, int a) const;
  /// u == T+1 returns the constant boundary 1/(1-gamma) for both entries.
  VPair v(int u, const LinearMdpModel& model, int s) const;
  /// Greedy action for Q^t_u(s, .); ties go to the lowest index.
  int argmax_action(int u, const LinearMdpModel& model, int s) const;

 private:
  const Generation* cur_;
  const Generation* prev1_;
  const Generation* prev2_;
  ThresholdWindow m_;
  double H_;
  bool deviation_clip_;
};

struct TransitionRecord {
  int t = 0;
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
};

/// Common interface driven by the harness: act at s_t, then observe the
/// transition that followed.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual int act(int s) = 0;
  virtual void observe(int s, int a, double r, int s_next) = 0;
  /// m_t for the step about to be acted on, NaN when the agent has none.
  virtual double threshold() const;
};

enum class DcVariant {
  kFaithful,
  kNoDeviationClip,   // Q = Q~ (clipping against older generations removed)
  kFrozenThreshold,   // m_{t+1} = m_t (threshold update removed)
};

/// Everything the verifier needs to re-evaluate any generation of a run.
struct DcTrace {
  std::shared_ptr<const LinearMdpModel> model;
  AgentConfig config;
  bool deviation_clip = true;
  std::vector<TransitionRecord> steps;
  std::vector<GenerationPtr> generations;         // generations[t-1] is G_t (recorded runs only)
  std::vector<ExtendedThreshold> thresholds;      // thresholds[t+1] is m_t, t = -1..T+1
  std::vector<double> potential;                  // phi_t' Lambda_t^{-1} phi_t
  GenerationPtr sentinel;

  int horizon() const { return config.horizon; }
  const ExtendedThreshold& m(int t) const { return thresholds.at(static_cast<std::size_t>(t + 1)); }
  const Generation& generation(int t) const;
  ChainView chain(int t) const;
};

/// Deviation-controlled clipped least-squares value iteration. Refits every
/// step; the clipping threshold only looks at visited states, so the agent
/// never enumerates the state space.
class DcAgent : public Agent {
 public:
  DcAgent(std::shared_ptr<const LinearMdpModel> model, AgentConfig cfg,
          DcVariant variant = DcVariant::kFaithful, bool record_generations = false);

  std::string name() const override { return "dc"; }
  int act(int s) override;
  void observe(int s, int a, double r, int s_next) override;
  double threshold() const override { return m(t_).value(); }

  int step() const { return t_; }
  const ExtendedThreshold& m(int t) const { return trace_.m(t); }
  const PsdMatrixState& covariance() const { return cov_; }
  const DcTrace& trace() const { return trace_; }
  /// Chain for the current step; valid after act().
  ChainView current_chain() const;

 private:
  void plan();
  void note_visited(int s);
  const Generation& gen_or_sentinel(const GenerationPtr& g) const;

  std::shared_ptr<const LinearMdpModel> model_;
  AgentConfig cfg_;
  DcVariant variant_;
  bool record_;
  int t_ = 1;
  int s1_ = -1;
  PsdMatrixState cov_;
  FeatureLog feats_;
  std::vector<int> next_states_;
  std::vector<int> visited_;    // distinct states among s_1..s_t
  std::vector<int> visit_slot_; // state id -> index into visited_, or -1
  GenerationPtr cur_, prev1_, prev2_;  // G_t, G_{t-1}, G_{t-2} after plan()
  DcTrace trace_;
};

/// Oracle-clipping baseline with determinant-doubling episodes. Its clipping
/// threshold is the minimum over the entire state space, so it needs a
/// finite model.
class BaselineAgent : public Agent {
 public:
  BaselineAgent(std::shared_ptr<const LinearMdpModel> model, AgentConfig cfg);

  std::string name() const override { return "baseline"; }
  int act(int s) override;
  void observe(int s, int a, double r, int s_next) override;

  int episodes() const { return episodes_; }
  int episode_start() const { return tk_; }
  const PsdMatrixState& covariance() const { return cov_; }

 private:
  void replan();

  std::shared_ptr<const LinearMdpModel> model_;
  AgentConfig cfg_;
  int t_ = 1;
  int tk_ = 1;
  int s1_ = -1;
  int episodes_ = 1;
  double logdet_at_tk_;
  PsdMatrixState cov_;
  FeatureLog feats_;
  std::vector<int> next_states_;
  std::vector<Mat> q_;  // q_[u - tk] is Q_u (S x A)
};

/// One planning pass of the tabular agent, stored as explicit tables.
struct TabularGeneration {
  int t = 0;
  int episode = 0;
  double m = 0.0;
  std::vector<Mat> q;       // q[u - t]: S x A
  std::vector<Vec> vtilde;  // vtilde[u - t]
  std::vector<Vec> v;       // v[u - t]
};

struct TabularTrace {
  AgentConfig config;
  int num_states = 0;
  int num_actions = 0;
  std::vector<TransitionRecord> steps;
  std::vector<TabularGeneration> generations;  // generations[t-1] (recorded runs only)
  std::vector<double> thresholds;              // thresholds[t-1] is m_t, t = 1..T+1
  std::vector<int> episode_of_step;            // episode index in force at step t
};

/// Tabular clipped value iteration without deviation control: empirical
/// kernel from visit counts (lambda = 0 pseudo-inverse), regression frozen at
/// the episode start, episodes end when prod(lambda + N(s,a)) doubles.
class TabularAgent : public Agent {
 public:
  TabularAgent(std::shared_ptr<const LinearMdpModel> model, AgentConfig cfg,
               bool record_generations = false);

  std::string name() const override { return "tabular"; }
  int act(int s) override;
  void observe(int s, int a, double r, int s_next) override;
  double threshold() const override { return trace_.thresholds.at(static_cast<std::size_t>(t_ - 1)); }

  int episodes() const { return episode_ + 1; }
  const TabularTrace& trace() const { return trace_; }

 private:
  void plan();
  double log_count_det(const std::vector<double>& n) const;

  std::shared_ptr<const LinearMdpModel> model_;
  AgentConfig cfg_;
  bool record_;
  int S_;
  int A_;
  int t_ = 1;
  int episode_ = 0;
  std::vector<double> n_sa_;        // current counts
  std::vector<double> n_sas_;
  std::vector<double> frozen_sa_;   // counts at the episode start
  std::vector<double> frozen_sas_;
  TabularGeneration cur_;
  TabularTrace trace_;
};

/// Uniformly random actions; a linear-regret reference point.
class RandomAgent : public Agent {
 public:
  RandomAgent(int num_actions, Rng rng) : num_actions_(num_actions), rng_(rng) {}
  std::string name() const override { return "random"; }
  int act(int) override { return static_cast<int>(rng_.below(static_cast<std::uint64_t>(num_actions_))); }
  void observe(int, int, double, int) override {}

 private:
  int num_actions_;
  Rng rng_;
};

}  // namespace avgrl
