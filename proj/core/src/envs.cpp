#include "avgrl/envs.hpp"

#include "avgrl/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace avgrl {

namespace {

std::string at_sa(int s, int a) {
  return "(s=" + std::to_string(s) + ",a=" + std::to_string(a) + ")";
}

Vec dirichlet_flat(int n, Rng& rng) {
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = -std::log1p(-rng.uniform());
  const double total = x.sum();
  if (total > 0.0) {
    x /= total;
  } else {
    x.setConstant(1.0 / n);
  }
  return x;
}

}  // namespace

TabularMdp::TabularMdp(int num_states, int num_actions, std::vector<double> transition,
                       std::vector<double> reward)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)) {
  if (num_states <= 0 || num_actions <= 0) {
    throw ContractViolation("TabularMdp: state and action counts must be positive");
  }
  const auto sa = static_cast<std::size_t>(num_states) * num_actions;
  if (transition_.size() != sa * num_states || reward_.size() != sa) {
    throw ContractViolation("TabularMdp: table sizes do not match S=" +
                            std::to_string(num_states) + ", A=" + std::to_string(num_actions));
  }
}

double TabularMdp::expect(int s, int a, const Vec& v) const {
  const double* row = &transition_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_];
  double acc = 0.0;
  for (int n = 0; n < num_states_; ++n) acc += row[n] * v[n];
  return acc;
}

LinearMdpModel::LinearMdpModel(int num_states, int num_actions, Mat features, Mat measures,
                               Vec theta)
    : num_states_(num_states),
      num_actions_(num_actions),
      features_(std::move(features)),
      measures_(std::move(measures)),
      theta_(std::move(theta)) {
  if (num_states <= 0 || num_actions <= 0 || theta_.size() == 0) {
    throw ContractViolation("LinearMdpModel: S, A and d must be positive");
  }
  const auto d = theta_.size();
  if (features_.rows() != static_cast<Eigen::Index>(num_states) * num_actions ||
      features_.cols() != d) {
    throw ContractViolation("LinearMdpModel: features must be (S*A) x d");
  }
  if (measures_.rows() != d || measures_.cols() != num_states) {
    throw ContractViolation("LinearMdpModel: measures must be d x S");
  }
}

Vec LinearMdpModel::transition_dist(int s, int a) const {
  return (features_.row(row(s, a)) * measures_).transpose();
}

double LinearMdpModel::expect(int s, int a, const Vec& v) const {
  return features_.row(row(s, a)).dot(measures_ * v);
}

bool LinearMdpModel::is_one_hot() const {
  if (dim() != num_states_ * num_actions_) return false;
  return features_.isIdentity(0.0);
}

ValidationReport validate(const LinearMdpModel& m, double tol) {
  ValidationReport report;
  const double root_d = std::sqrt(static_cast<double>(m.dim()));
  for (int s = 0; s < m.num_states(); ++s) {
    for (int a = 0; a < m.num_actions(); ++a) {
      const double norm = m.phi(s, a).norm();
      if (norm > 1.0 + tol) report.violations.push_back({"feature_norm", at_sa(s, a), norm});
      const Vec dist = m.transition_dist(s, a);
      const double low = dist.minCoeff();
      if (low < -tol) report.violations.push_back({"transition_negative", at_sa(s, a), low});
      const double sum = dist.sum();
      if (std::abs(sum - 1.0) > tol) {
        report.violations.push_back({"transition_row_sum", at_sa(s, a), sum});
      }
      const double r = m.reward(s, a);
      if (r < -tol || r > 1.0 + tol) report.violations.push_back({"reward_range", at_sa(s, a), r});
    }
  }
  const double theta_norm = m.theta().norm();
  if (theta_norm > root_d + tol) report.violations.push_back({"theta_norm", "theta", theta_norm});
  const double mu_norm = m.measures().rowwise().sum().norm();
  if (mu_norm > root_d + tol) {
    report.violations.push_back({"measure_total_norm", "mu(S)", mu_norm});
  }
  return report;
}

ValidationReport validate(const TabularMdp& t, double tol) {
  ValidationReport report;
  for (int s = 0; s < t.num_states(); ++s) {
    for (int a = 0; a < t.num_actions(); ++a) {
      double sum = 0.0;
      for (int n = 0; n < t.num_states(); ++n) {
        const double p = t.p(s, a, n);
        if (p < -tol) report.violations.push_back({"transition_negative", at_sa(s, a), p});
        sum += p;
      }
      if (std::abs(sum - 1.0) > tol) {
        report.violations.push_back({"transition_row_sum", at_sa(s, a), sum});
      }
      const double r = t.r(s, a);
      if (r < -tol || r > 1.0 + tol) report.violations.push_back({"reward_range", at_sa(s, a), r});
    }
  }
  return report;
}

LinearMdpModel embed_tabular(const TabularMdp& t) {
  const int S = t.num_states();
  const int A = t.num_actions();
  const int d = S * A;
  Mat features = Mat::Identity(d, d);
  Mat measures(d, S);
  Vec theta(d);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const int k = s * A + a;
      theta[k] = t.r(s, a);
      for (int n = 0; n < S; ++n) measures(k, n) = t.p(s, a, n);
    }
  }
  return LinearMdpModel(S, A, std::move(features), std::move(measures), std::move(theta));
}

TabularMdp to_tabular(const LinearMdpModel& m) {
  const int S = m.num_states();
  const int A = m.num_actions();
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S);
  std::vector<double> reward(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const Vec dist = m.transition_dist(s, a);
      for (int n = 0; n < S; ++n) {
        transition[(static_cast<std::size_t>(s) * A + a) * S + n] = dist[n];
      }
      reward[static_cast<std::size_t>(s) * A + a] = m.reward(s, a);
    }
  }
  return TabularMdp(S, A, std::move(transition), std::move(reward));
}

int sample_next(const LinearMdpModel& m, int s, int a, Rng& rng) {
  const Vec dist = m.transition_dist(s, a);
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (int n = 0; n < dist.size(); ++n) {
    if (dist[n] <= 0.0) continue;
    acc += dist[n];
    last_positive = n;
    if (u < acc) return n;
  }
  // u landed in the round-off gap above the accumulated mass.
  return last_positive;
}

TabularMdp random_unichain_tabular(int num_states, int num_actions, Rng& rng,
                                   double epsilon_mix) {
  if (num_states < 1 || num_actions < 1) {
    throw ContractViolation("random_unichain_tabular: S and A must be at least 1");
  }
  if (!(epsilon_mix > 0.0 && epsilon_mix <= 1.0)) {
    throw ContractViolation("random_unichain_tabular: epsilon_mix must lie in (0, 1]");
  }
  const int S = num_states;
  const int A = num_actions;
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S);
  std::vector<double> reward(static_cast<std::size_t>(S) * A);
  const double uniform = 1.0 / S;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const Vec row = dirichlet_flat(S, rng);
      for (int n = 0; n < S; ++n) {
        transition[(static_cast<std::size_t>(s) * A + a) * S + n] =
            epsilon_mix == 1.0 ? uniform : (1.0 - epsilon_mix) * row[n] + epsilon_mix * uniform;
      }
    }
  }
  for (auto& r : reward) r = rng.uniform();
  return TabularMdp(S, A, std::move(transition), std::move(reward));
}

LinearMdpModel random_low_rank(int num_states, int num_actions, int dim, Rng& rng,
                               double epsilon_mix) {
  if (num_states < 1 || num_actions < 1 || dim < 1) {
    throw ContractViolation("random_low_rank: S, A and d must be at least 1");
  }
  if (!(epsilon_mix > 0.0 && epsilon_mix <= 1.0)) {
    throw ContractViolation("random_low_rank: epsilon_mix must lie in (0, 1]");
  }
  const int S = num_states;
  const int A = num_actions;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Mat measures(dim, S);
    for (int k = 0; k < dim; ++k) {
      const Vec atom = dirichlet_flat(S, rng);
      for (int n = 0; n < S; ++n) measures(k, n) = (1.0 - epsilon_mix) * atom[n] + epsilon_mix / S;
    }
    Mat features(S * A, dim);
    for (int i = 0; i < S * A; ++i) features.row(i) = dirichlet_flat(dim, rng).transpose();
    Vec theta(dim);
    for (int k = 0; k < dim; ++k) theta[k] = rng.uniform();
    LinearMdpModel model(S, A, std::move(features), std::move(measures), std::move(theta));
    if (validate(model).ok()) return model;
  }
  throw ConvergenceError("random_low_rank: no valid model after 100 draws");
}

nlohmann::json to_json(const LinearMdpModel& m) {
  nlohmann::json j;
  j["format"] = "linmdp-v1";
  j["d"] = m.dim();
  j["num_states"] = m.num_states();
  j["num_actions"] = m.num_actions();
  std::vector<double> features;
  features.reserve(static_cast<std::size_t>(m.features().size()));
  for (Eigen::Index i = 0; i < m.features().rows(); ++i) {
    for (Eigen::Index k = 0; k < m.features().cols(); ++k) features.push_back(m.features()(i, k));
  }
  std::vector<double> measures;
  measures.reserve(static_cast<std::size_t>(m.measures().size()));
  for (Eigen::Index k = 0; k < m.measures().rows(); ++k) {
    for (Eigen::Index n = 0; n < m.measures().cols(); ++n) measures.push_back(m.measures()(k, n));
  }
  j["features"] = features;
  j["measures"] = measures;
  j["theta"] = std::vector<double>(m.theta().data(), m.theta().data() + m.theta().size());
  return j;
}

nlohmann::json to_json(const TabularMdp& t) {
  nlohmann::json j;
  j["format"] = "tabmdp-v1";
  j["num_states"] = t.num_states();
  j["num_actions"] = t.num_actions();
  j["transition"] = t.transition();
  j["reward"] = t.reward();
  return j;
}

LinearMdpModel linear_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "linmdp-v1") {
      throw ConfigError("expected format \"linmdp-v1\"");
    }
    const int d = j.at("d").get<int>();
    const int S = j.at("num_states").get<int>();
    const int A = j.at("num_actions").get<int>();
    if (d <= 0 || S <= 0 || A <= 0) throw ConfigError("linmdp-v1: d, num_states and num_actions must be positive");
    const auto features = j.at("features").get<std::vector<double>>();
    const auto measures = j.at("measures").get<std::vector<double>>();
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (features.size() != static_cast<std::size_t>(S) * A * d ||
        measures.size() != static_cast<std::size_t>(d) * S || theta.size() != static_cast<std::size_t>(d)) {
      throw ConfigError("linmdp-v1: array lengths do not match d, num_states, num_actions");
    }
    Mat f(S * A, d);
    for (int i = 0; i < S * A; ++i) {
      for (int k = 0; k < d; ++k) f(i, k) = features[static_cast<std::size_t>(i) * d + k];
    }
    Mat mu(d, S);
    for (int k = 0; k < d; ++k) {
      for (int n = 0; n < S; ++n) mu(k, n) = measures[static_cast<std::size_t>(k) * S + n];
    }
    Vec th = Eigen::Map<const Vec>(theta.data(), d);
    return LinearMdpModel(S, A, std::move(f), std::move(mu), std::move(th));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("linmdp-v1: ") + e.what());
  }
}

TabularMdp tabular_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "tabmdp-v1") {
      throw ConfigError("expected format \"tabmdp-v1\"");
    }
    return TabularMdp(j.at("num_states").get<int>(), j.at("num_actions").get<int>(),
                      j.at("transition").get<std::vector<double>>(),
                      j.at("reward").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("tabmdp-v1: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("tabmdp-v1: ") + e.what());
  }
}

LinearMdpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open environment file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("environment file " + path + ": " + e.what());
  }
  const std::string format = j.value("format", "");
  if (format == "linmdp-v1") return linear_from_json(j);
  if (format == "tabmdp-v1") return embed_tabular(tabular_from_json(j));
  throw ConfigError("environment file " + path + ": unknown format \"" + format + "\"");
}

void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace avgrl
