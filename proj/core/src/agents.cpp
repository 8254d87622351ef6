#include "avgrl/agents.hpp"

#include "avgrl/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace avgrl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int argmax_row(const Mat& q, int s) {
  int best = 0;
  for (int a = 1; a < q.cols(); ++a) {
    if (q(s, a) > q(s, best)) best = a;
  }
  return best;
}

}  // namespace

void AgentConfig::check() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractViolation("gamma must lie in [0, 1)");
  if (!(lambda > 0.0)) throw ContractViolation("lambda must be positive");
  if (!(H >= 0.0)) throw ContractViolation("H must be nonnegative");
  if (!(beta >= 0.0)) throw ContractViolation("beta must be nonnegative");
  if (horizon < 1) throw ContractViolation("horizon must be at least 1");
}

double theory_gamma(int horizon) { return 1.0 - std::sqrt(1.0 / horizon); }

double theory_beta(double c_beta, double bias_span, int dim, int horizon, double delta) {
  return 2.0 * c_beta * bias_span * dim *
         std::sqrt(std::log(static_cast<double>(dim) * horizon / delta));
}

AgentConfig theory_config(int horizon, double bias_span, int dim, double c_beta, double delta) {
  AgentConfig cfg;
  cfg.gamma = theory_gamma(horizon);
  cfg.lambda = 1.0;
  cfg.H = 2.0 * bias_span;
  cfg.beta = theory_beta(c_beta, bias_span, dim, horizon, delta);
  cfg.horizon = horizon;
  return cfg;
}

double Agent::threshold() const { return kNaN; }

// ---------------------------------------------------------------------------
// Generation

std::shared_ptr<const Generation> Generation::sentinel(int t, const AgentConfig& cfg) {
  return std::make_shared<const Generation>(t, cfg, ExtendedThreshold::unset(), nullptr);
}

Generation::Generation(int t, const AgentConfig& cfg, ExtendedThreshold m_self,
                       std::shared_ptr<const Mat> cov_inv)
    : t_(t),
      horizon_(cfg.horizon),
      gamma_(cfg.gamma),
      beta_(cfg.beta),
      cap_(cfg.cap()),
      m_self_(m_self),
      cov_inv_(std::move(cov_inv)) {
  if (cov_inv_) {
    if (t < 1 || t > horizon_) {
      throw ContractViolation("Generation: step " + std::to_string(t) + " outside [1, T]");
    }
    const auto n = static_cast<std::size_t>(horizon_ - t + 1);
    weights_.resize(n);
    filled_.assign(n, 0);
  }
}

void Generation::check_index(int u) const {
  if (u < t_ || u > horizon_) {
    throw ContractViolation("generation " + std::to_string(t_) + ": index u=" + std::to_string(u) +
                            " outside [" + std::to_string(t_) + ", " + std::to_string(horizon_) +
                            "]");
  }
}

bool Generation::has_weight(int u) const {
  if (is_sentinel() || u < t_ || u > horizon_) return false;
  return filled_[static_cast<std::size_t>(u - t_)] != 0;
}

const FittedWeight& Generation::weight(int u) const {
  if (is_sentinel()) throw ContractViolation("sentinel generation has no weights");
  check_index(u);
  if (!has_weight(u)) {
    throw ContractViolation("generation " + std::to_string(t_) + ": weight for u=" +
                            std::to_string(u) + " not fitted yet");
  }
  return weights_[static_cast<std::size_t>(u - t_)];
}

void Generation::set_weight(int u, FittedWeight fw) {
  if (is_sentinel()) throw ContractViolation("sentinel generation has no weights");
  check_index(u);
  const auto i = static_cast<std::size_t>(u - t_);
  weights_[i] = std::move(fw);
  filled_[i] = 1;
}

double Generation::bonus(const Vec& phi) const {
  return is_sentinel() ? 0.0 : weighted_norm(*cov_inv_, phi);
}

double Generation::qtilde(int u, const Vec& phi, double reward) const {
  return qtilde(u, phi, reward, bonus(phi));
}

double Generation::qtilde(int u, const Vec& phi, double reward, double bonus) const {
  if (is_sentinel()) return cap_;
  const FittedWeight& fw = weight(u);
  const double value = reward + gamma_ * (phat_eval(fw, phi) + beta_ * bonus);
  return std::min(value, cap_);
}

// ---------------------------------------------------------------------------
// ChainView

ChainView::ChainView(const Generation& cur, const Generation& prev1, const Generation& prev2,
                     ThresholdWindow m, double H, bool deviation_clip)
    : cur_(&cur), prev1_(&prev1), prev2_(&prev2), m_(m), H_(H), deviation_clip_(deviation_clip) {
  if (!m_.m_t.is_set()) throw ContractViolation("ChainView: m_t must be set");
}

QParts ChainView::q_parts(int u, const Vec& phi, double reward) const {
  const double b[3] = {cur_->bonus(phi), prev1_->bonus(phi), prev2_->bonus(phi)};
  return q_parts(u, phi, reward, b);
}

QParts ChainView::q_parts(int u, const Vec& phi, double reward, const double bonus[3]) const {
  QParts p;
  p.qtilde = cur_->qtilde(u, phi, reward, bonus[0]);
  if (!deviation_clip_) {
    p.lower = -std::numeric_limits<double>::infinity();
    p.upper = std::numeric_limits<double>::infinity();
    p.q = p.qtilde;
    return p;
  }
  const double q1 = prev1_->qtilde(u, phi, reward, bonus[1]);
  const double q2 = prev2_->qtilde(u, phi, reward, bonus[2]);
  p.upper = std::min(q1, q2);
  p.lower = std::max(shifted_lower_bound(q1, m_.m_tm1, m_.m_t),
                     shifted_lower_bound(q2, m_.m_tm2, m_.m_t));
  // The bounds are not ordered in general; (x v L) ^ U then returns U.
  p.q = clip_lattice(p.qtilde, p.lower, p.upper);
  return p;
}

double ChainView::q(int u, const LinearMdpModel& model, int s, int a) const {
  return q_parts(u, model.phi(s, a), model.reward(s, a)).q;
}

VPair ChainView::v(int u, const LinearMdpModel& model, int s) const {
  const double cap = cur_->cap();
  if (u == cur_->horizon() + 1) return {cap, cap};
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < model.num_actions(); ++a) best = std::max(best, q(u, model, s, a));
  const double m = m_.m_t.value();
  return {best, clip(best, m, m + H_)};
}

int ChainView::argmax_action(int u, const LinearMdpModel& model, int s) const {
  int best = 0;
  double best_q = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < model.num_actions(); ++a) {
    const double q_a = q(u, model, s, a);
    if (q_a > best_q) {
      best_q = q_a;
      best = a;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// DcTrace

const Generation& DcTrace::generation(int t) const {
  if (t <= 0) return *sentinel;
  if (static_cast<std::size_t>(t) > generations.size()) {
    throw ContractViolation("DcTrace: generation " + std::to_string(t) + " was not recorded");
  }
  return *generations[static_cast<std::size_t>(t - 1)];
}

ChainView DcTrace::chain(int t) const {
  return ChainView(generation(t), generation(t - 1), generation(t - 2), {m(t - 2), m(t - 1), m(t)},
                   config.H, deviation_clip);
}

// ---------------------------------------------------------------------------
// DcAgent

DcAgent::DcAgent(std::shared_ptr<const LinearMdpModel> model, AgentConfig cfg, DcVariant variant,
                 bool record_generations)
    : model_(std::move(model)),
      cfg_(cfg),
      variant_(variant),
      record_(record_generations),
      cov_(static_cast<std::size_t>(model_->dim()), cfg.lambda),
      feats_(model_->dim()) {
  cfg_.check();
  trace_.model = model_;
  trace_.config = cfg_;
  trace_.deviation_clip = variant_ != DcVariant::kNoDeviationClip;
  trace_.sentinel = Generation::sentinel(0, cfg_);
  trace_.thresholds = {ExtendedThreshold::unset(), ExtendedThreshold::unset(),
                       ExtendedThreshold(cfg_.cap())};
}

const Generation& DcAgent::gen_or_sentinel(const GenerationPtr& g) const {
  return g ? *g : *trace_.sentinel;
}

void DcAgent::note_visited(int s) {
  if (s < 0) throw ContractViolation("state ids must be nonnegative");
  if (static_cast<std::size_t>(s) >= visit_slot_.size()) visit_slot_.resize(s + 1, -1);
  if (visit_slot_[s] < 0) {
    visit_slot_[s] = static_cast<int>(visited_.size());
    visited_.push_back(s);
  }
}

ChainView DcAgent::current_chain() const {
  if (!cur_ || cur_->t() != t_) throw ContractViolation("DcAgent: no plan for the current step");
  return ChainView(*cur_, gen_or_sentinel(prev1_), gen_or_sentinel(prev2_),
                   {m(t_ - 2), m(t_ - 1), m(t_)}, cfg_.H, trace_.deviation_clip);
}

void DcAgent::plan() {
  const int t = t_;
  const int T = cfg_.horizon;
  const int A = model_->num_actions();
  auto inv = std::make_shared<const Mat>(cov_.inv());
  auto g = std::make_shared<Generation>(t, cfg_, m(t), inv);
  prev2_ = prev1_;
  prev1_ = cur_;
  const ChainView view(*g, gen_or_sentinel(prev1_), gen_or_sentinel(prev2_),
                       {m(t - 2), m(t - 1), m(t)}, cfg_.H, trace_.deviation_clip);

  // Features, rewards and bonuses at visited states do not depend on u.
  const std::size_t k = visited_.size();
  std::vector<Vec> phis(k * A);
  std::vector<double> rewards(k * A);
  std::vector<std::array<double, 3>> bonuses(k * A);
  for (std::size_t i = 0; i < k; ++i) {
    for (int a = 0; a < A; ++a) {
      const std::size_t j = i * A + a;
      phis[j] = model_->phi(visited_[i], a);
      rewards[j] = model_->reward(visited_[i], a);
      bonuses[j] = {g->bonus(phis[j]), gen_or_sentinel(prev1_).bonus(phis[j]),
                    gen_or_sentinel(prev2_).bonus(phis[j])};
    }
  }

  const double m_t = m(t).value();
  std::vector<double> v_next(k);
  std::vector<double> targets(next_states_.size());
  const std::size_t s1_slot = static_cast<std::size_t>(visit_slot_[s1_]);
  for (int u = T; u >= t; --u) {
    if (u == T) {
      std::fill(v_next.begin(), v_next.end(), cfg_.cap());
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) {
          const std::size_t j = i * A + a;
          best = std::max(best, view.q_parts(u + 1, phis[j], rewards[j], bonuses[j].data()).q);
        }
        v_next[i] = clip(best, m_t, m_t + cfg_.H);
      }
    }
    for (std::size_t tau = 0; tau < next_states_.size(); ++tau) {
      targets[tau] = v_next[static_cast<std::size_t>(visit_slot_[next_states_[tau]])];
    }
    g->set_weight(u, fit_weight(*inv, feats_, RegressionTarget{targets, v_next[s1_slot]}));
  }
  cur_ = std::move(g);
  if (record_) trace_.generations.push_back(cur_);
}

int DcAgent::act(int s) {
  if (t_ > cfg_.horizon) throw ContractViolation("DcAgent: horizon exhausted");
  if (t_ == 1) {
    s1_ = s;
    note_visited(s);
  }
  plan();
  return current_chain().argmax_action(t_, *model_, s);
}

void DcAgent::observe(int s, int a, double r, int s_next) {
  if (!cur_ || cur_->t() != t_) throw ContractViolation("DcAgent: observe() before act()");
  const Vec phi = model_->phi(s, a);
  trace_.potential.push_back(phi.dot(cov_.inv() * phi));
  cov_.rank1_update(phi);
  feats_.append(phi);
  next_states_.push_back(s_next);
  note_visited(s_next);

  const ExtendedThreshold& m_t = m(t_);
  ExtendedThreshold m_next = m_t;
  if (variant_ != DcVariant::kFrozenThreshold && t_ < cfg_.horizon) {
    m_next = m_t.min_with(current_chain().v(t_ + 1, *model_, s_next).vtilde);
  }
  trace_.thresholds.push_back(m_next);
  trace_.steps.push_back({t_, s, a, r, s_next});
  ++t_;
}

// ---------------------------------------------------------------------------
// BaselineAgent

BaselineAgent::BaselineAgent(std::shared_ptr<const LinearMdpModel> model, AgentConfig cfg)
    : model_(std::move(model)),
      cfg_(cfg),
      logdet_at_tk_(0.0),
      cov_(static_cast<std::size_t>(model_->dim()), cfg.lambda),
      feats_(model_->dim()) {
  cfg_.check();
  logdet_at_tk_ = cov_.logdet();
  const Mat init = Mat::Constant(model_->num_states(), model_->num_actions(), cfg_.cap());
  q_.assign(static_cast<std::size_t>(cfg_.horizon), init);
}

int BaselineAgent::act(int s) {
  if (t_ > cfg_.horizon) throw ContractViolation("BaselineAgent: horizon exhausted");
  if (t_ == 1) s1_ = s;
  return argmax_row(q_[static_cast<std::size_t>(t_ - tk_)], s);
}

void BaselineAgent::observe(int s, int a, double, int s_next) {
  cov_.rank1_update(model_->phi(s, a));
  feats_.append(model_->phi(s, a));
  next_states_.push_back(s_next);
  if (t_ < cfg_.horizon && cov_.logdet() - logdet_at_tk_ > std::numbers::ln2) {
    tk_ = t_ + 1;
    logdet_at_tk_ = cov_.logdet();
    ++episodes_;
    replan();
  }
  ++t_;
}

void BaselineAgent::replan() {
  const int S = model_->num_states();
  const int A = model_->num_actions();
  const int T = cfg_.horizon;
  const Mat& inv = cov_.inv();
  Mat bonus(S, A);
  Mat reward(S, A);
  std::vector<Vec> phis(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      phis[static_cast<std::size_t>(s) * A + a] = model_->phi(s, a);
      bonus(s, a) = weighted_norm(inv, phis[static_cast<std::size_t>(s) * A + a]);
      reward(s, a) = model_->reward(s, a);
    }
  }
  q_.assign(static_cast<std::size_t>(T - tk_ + 1), Mat());
  Vec v_next = Vec::Constant(S, cfg_.cap());
  std::vector<double> targets(next_states_.size());
  for (int u = T; u >= tk_; --u) {
    for (std::size_t tau = 0; tau < next_states_.size(); ++tau) targets[tau] = v_next[next_states_[tau]];
    const FittedWeight fw = fit_weight(inv, feats_, RegressionTarget{targets, v_next[s1_]});
    Mat q(S, A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double val = reward(s, a) + cfg_.gamma * (phat_eval(fw, phis[static_cast<std::size_t>(s) * A + a]) +
                                                        cfg_.beta * bonus(s, a));
        q(s, a) = std::min(val, cfg_.cap());
      }
    }
    const Vec vtilde = q.rowwise().maxCoeff();
    const double lo = vtilde.minCoeff();
    for (int s = 0; s < S; ++s) v_next[s] = clip(vtilde[s], lo, lo + cfg_.H);
    q_[static_cast<std::size_t>(u - tk_)] = std::move(q);
  }
}

// ---------------------------------------------------------------------------
// TabularAgent

TabularAgent::TabularAgent(std::shared_ptr<const LinearMdpModel> model, AgentConfig cfg,
                           bool record_generations)
    : model_(std::move(model)),
      cfg_(cfg),
      record_(record_generations),
      S_(model_->num_states()),
      A_(model_->num_actions()) {
  cfg_.check();
  if (!model_->is_one_hot()) {
    throw ContractViolation("TabularAgent: model features are not a one-hot tabular embedding");
  }
  const auto sa = static_cast<std::size_t>(S_) * A_;
  n_sa_.assign(sa, 0.0);
  n_sas_.assign(sa * S_, 0.0);
  frozen_sa_ = n_sa_;
  frozen_sas_ = n_sas_;
  trace_.config = cfg_;
  trace_.num_states = S_;
  trace_.num_actions = A_;
  trace_.thresholds = {cfg_.cap()};
}

double TabularAgent::log_count_det(const std::vector<double>& n) const {
  double acc = 0.0;
  for (double c : n) acc += std::log(cfg_.lambda + c);
  return acc;
}

void TabularAgent::plan() {
  const int t = t_;
  const int T = cfg_.horizon;
  const double cap = cfg_.cap();
  const double m_t = trace_.thresholds[static_cast<std::size_t>(t - 1)];
  TabularGeneration g;
  g.t = t;
  g.episode = episode_;
  g.m = m_t;
  const auto n = static_cast<std::size_t>(T - t + 1);
  g.q.resize(n);
  g.vtilde.resize(n);
  g.v.resize(n);
  Vec v_next = Vec::Constant(S_, cap);
  for (int u = T; u >= t; --u) {
    Mat q(S_, A_);
    for (int s = 0; s < S_; ++s) {
      for (int a = 0; a < A_; ++a) {
        const std::size_t sa = static_cast<std::size_t>(s) * A_ + a;
        const double visits = frozen_sa_[sa];
        if (visits == 0.0) {
          // Unexplored direction: bonus 1/(1-gamma), so the cap binds.
          q(s, a) = cap;
          continue;
        }
        double expected = 0.0;
        for (int next = 0; next < S_; ++next) {
          const double c = frozen_sas_[sa * S_ + next];
          if (c > 0.0) expected += (c / visits) * v_next[next];
        }
        const double val = model_->reward(s, a) + cfg_.gamma * (expected + cfg_.beta / std::sqrt(visits));
        q(s, a) = std::min(val, cap);
      }
    }
    Vec vtilde = q.rowwise().maxCoeff();
    Vec v(S_);
    for (int s = 0; s < S_; ++s) v[s] = clip(vtilde[s], m_t, m_t + cfg_.H);
    const auto i = static_cast<std::size_t>(u - t);
    g.q[i] = std::move(q);
    g.vtilde[i] = std::move(vtilde);
    g.v[i] = v;
    v_next = std::move(v);
  }
  cur_ = std::move(g);
  trace_.episode_of_step.push_back(episode_);
  if (record_) trace_.generations.push_back(cur_);
}

int TabularAgent::act(int s) {
  if (t_ > cfg_.horizon) throw ContractViolation("TabularAgent: horizon exhausted");
  plan();
  return argmax_row(cur_.q.front(), s);
}

void TabularAgent::observe(int s, int a, double r, int s_next) {
  if (cur_.t != t_) throw ContractViolation("TabularAgent: observe() before act()");
  const std::size_t sa = static_cast<std::size_t>(s) * A_ + a;
  n_sa_[sa] += 1.0;
  n_sas_[sa * S_ + s_next] += 1.0;

  const double m_t = trace_.thresholds[static_cast<std::size_t>(t_ - 1)];
  double m_next = m_t;
  if (t_ < cfg_.horizon) m_next = std::min(cur_.vtilde[1][s_next], m_t);
  trace_.thresholds.push_back(m_next);
  trace_.steps.push_back({t_, s, a, r, s_next});

  if (log_count_det(n_sa_) - log_count_det(frozen_sa_) > std::numbers::ln2) {
    ++episode_;
    frozen_sa_ = n_sa_;
    frozen_sas_ = n_sas_;
  }
  ++t_;
}

}  // namespace avgrl
