#include "avgrl/harness.hpp"

#include "avgrl/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace avgrl {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing helpers

template <typename T>
void read_field(const json& obj, const std::string& section, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0) {
          throw ConfigError("");
        }
      }
    } else {
      if (!it->is_number()) throw ConfigError("");
    }
    out = it->get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config: " + section + "." + key + " has the wrong type (got " +
                      it->dump() + ")");
  }
}

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) throw ConfigError("config: unknown key '" + section + "." + key + "'");
  }
}

void require_one_of(const std::string& field, const std::string& value,
                    std::initializer_list<const char*> allowed) {
  const bool ok =
      std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return value == a; });
  if (!ok) {
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
    throw ConfigError("config: " + field + " = '" + value + "' (expected " + list + ")");
  }
}

// ---------------------------------------------------------------------------
// Number formatting for CSV: shortest round-trip representation.

void append_number(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "nan";
    return;
  }
  if (std::isinf(x)) {
    out += x > 0 ? "inf" : "-inf";
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

void append_int(std::string& out, long long x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

// Tabular model from its explicit (S, A, P, r) description.
TabularMdp make_tabular(int S, int A, const std::vector<std::vector<std::vector<double>>>& p,
                        const std::vector<std::vector<double>>& r) {
  std::vector<double> trans;
  std::vector<double> rew;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      trans.insert(trans.end(), p[s][a].begin(), p[s][a].end());
      rew.push_back(r[s][a]);
    }
  }
  return TabularMdp(S, A, std::move(trans), std::move(rew));
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

void ExperimentConfig::validate() const {
  require_one_of("env.kind", env.kind,
                 {"tabular-random", "tabular-file", "linear-file", "linear-random", "builtin"});
  if (env.kind == "tabular-random" || env.kind == "linear-random") {
    if (env.num_states < 1) throw ConfigError("config: env.num_states must be >= 1");
    if (env.num_actions < 1) throw ConfigError("config: env.num_actions must be >= 1");
    if (!(env.epsilon_mix >= 0.0 && env.epsilon_mix <= 1.0)) {
      throw ConfigError("config: env.epsilon_mix must lie in [0, 1]");
    }
  }
  if (env.kind == "linear-random" && env.dim < 1) throw ConfigError("config: env.dim must be >= 1");
  if ((env.kind == "tabular-file" || env.kind == "linear-file") && env.path.empty()) {
    throw ConfigError("config: env.path is required for kind " + env.kind);
  }
  if (env.kind == "builtin") require_one_of("env.name", env.name, {"river", "two-state", "constant"});

  require_one_of("agent.algorithm", agent.algorithm, {"dc", "baseline", "tabular", "random"});
  if (agent.T < 1) throw ConfigError("config: agent.T must be >= 1");
  require_one_of("agent.gamma_mode", agent.gamma_mode, {"auto", "explicit"});
  if (agent.gamma_mode == "explicit" && !(agent.gamma >= 0.0 && agent.gamma < 1.0)) {
    throw ConfigError("config: agent.gamma must lie in [0, 1)");
  }
  if (agent.gamma_mode == "auto" && agent.T < 2) {
    throw ConfigError("config: gamma_mode auto needs T >= 2 (T = 1 gives gamma = 0 and cap 1)");
  }
  if (!(agent.lambda > 0.0)) throw ConfigError("config: agent.lambda must be positive");
  require_one_of("agent.H_mode", agent.H_mode, {"oracle", "explicit"});
  if (agent.H_mode == "explicit" && !(agent.H >= 0.0)) throw ConfigError("config: agent.H must be >= 0");
  require_one_of("agent.beta_mode", agent.beta_mode, {"theory", "explicit"});
  if (agent.beta_mode == "theory") {
    if (!(agent.c_beta >= 0.0)) throw ConfigError("config: agent.c_beta must be >= 0");
    if (!(agent.delta > 0.0 && agent.delta < 1.0)) throw ConfigError("config: agent.delta must lie in (0, 1)");
  } else if (!(agent.beta >= 0.0)) {
    throw ConfigError("config: agent.beta must be >= 0");
  }
  if (run.num_seeds < 1) throw ConfigError("config: run.num_seeds must be >= 1");
  if (run.initial_state < 0) throw ConfigError("config: run.initial_state must be >= 0");
}

json to_json(const ExperimentConfig& c) {
  return json{
      {"env",
       {{"kind", c.env.kind},
        {"num_states", c.env.num_states},
        {"num_actions", c.env.num_actions},
        {"epsilon_mix", c.env.epsilon_mix},
        {"env_seed", c.env.env_seed},
        {"path", c.env.path},
        {"dim", c.env.dim},
        {"name", c.env.name}}},
      {"agent",
       {{"algorithm", c.agent.algorithm},
        {"T", c.agent.T},
        {"gamma_mode", c.agent.gamma_mode},
        {"gamma", c.agent.gamma},
        {"lambda", c.agent.lambda},
        {"H_mode", c.agent.H_mode},
        {"H", c.agent.H},
        {"beta_mode", c.agent.beta_mode},
        {"c_beta", c.agent.c_beta},
        {"delta", c.agent.delta},
        {"beta", c.agent.beta}}},
      {"run",
       {{"agent_seed", c.run.agent_seed},
        {"num_seeds", c.run.num_seeds},
        {"out", c.run.out},
        {"record_timing", c.run.record_timing},
        {"initial_state", c.run.initial_state}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  reject_unknown(j, "<root>", {"env", "agent", "run"});
  if (auto it = j.find("env"); it != j.end()) {
    const json& e = *it;
    reject_unknown(e, "env", {"kind", "num_states", "num_actions", "epsilon_mix", "env_seed", "path", "dim", "name"});
    read_field(e, "env", "kind", c.env.kind);
    read_field(e, "env", "num_states", c.env.num_states);
    read_field(e, "env", "num_actions", c.env.num_actions);
    read_field(e, "env", "epsilon_mix", c.env.epsilon_mix);
    read_field(e, "env", "env_seed", c.env.env_seed);
    read_field(e, "env", "path", c.env.path);
    read_field(e, "env", "dim", c.env.dim);
    read_field(e, "env", "name", c.env.name);
  }
  if (auto it = j.find("agent"); it != j.end()) {
    const json& a = *it;
    reject_unknown(a, "agent", {"algorithm", "T", "gamma_mode", "gamma", "lambda", "H_mode", "H",
                                "beta_mode", "c_beta", "delta", "beta"});
    read_field(a, "agent", "algorithm", c.agent.algorithm);
    read_field(a, "agent", "T", c.agent.T);
    read_field(a, "agent", "gamma_mode", c.agent.gamma_mode);
    read_field(a, "agent", "gamma", c.agent.gamma);
    read_field(a, "agent", "lambda", c.agent.lambda);
    read_field(a, "agent", "H_mode", c.agent.H_mode);
    read_field(a, "agent", "H", c.agent.H);
    read_field(a, "agent", "beta_mode", c.agent.beta_mode);
    read_field(a, "agent", "c_beta", c.agent.c_beta);
    read_field(a, "agent", "delta", c.agent.delta);
    read_field(a, "agent", "beta", c.agent.beta);
  }
  if (auto it = j.find("run"); it != j.end()) {
    const json& r = *it;
    reject_unknown(r, "run", {"agent_seed", "num_seeds", "out", "record_timing", "initial_state"});
    read_field(r, "run", "agent_seed", c.run.agent_seed);
    read_field(r, "run", "num_seeds", c.run.num_seeds);
    read_field(r, "run", "out", c.run.out);
    read_field(r, "run", "record_timing", c.run.record_timing);
    read_field(r, "run", "initial_state", c.run.initial_state);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Environments

TabularMdp builtin_env(const std::string& name) {
  if (name == "river") {
    // Actions: 0 = drift left, 1 = push right.
    return make_tabular(3, 2,
                        {{{1.0, 0.0, 0.0}, {0.4, 0.6, 0.0}},
                         {{1.0, 0.0, 0.0}, {0.1, 0.3, 0.6}},
                         {{0.0, 1.0, 0.0}, {0.0, 0.3, 0.7}}},
                        {{0.2, 0.0}, {0.0, 0.0}, {0.0, 1.0}});
  }
  if (name == "two-state") {
    return make_tabular(2, 2, {{{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {0.0, 1.0}}},
                        {{1.0, 1.0}, {0.0, 0.0}});
  }
  if (name == "constant") {
    return make_tabular(2, 2, {{{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}},
                        {{0.5, 0.5}, {0.5, 0.5}});
  }
  throw ConfigError("unknown builtin environment '" + name + "'");
}

ResolvedEnv resolve_env(const EnvSpec& spec) {
  std::shared_ptr<const LinearMdpModel> model;
  Rng env_rng(spec.env_seed);
  try {
    if (spec.kind == "tabular-random") {
      model = std::make_shared<const LinearMdpModel>(embed_tabular(
          random_unichain_tabular(spec.num_states, spec.num_actions, env_rng, spec.epsilon_mix)));
    } else if (spec.kind == "linear-random") {
      model = std::make_shared<const LinearMdpModel>(
          random_low_rank(spec.num_states, spec.num_actions, spec.dim, env_rng, spec.epsilon_mix));
    } else if (spec.kind == "builtin") {
      model = std::make_shared<const LinearMdpModel>(embed_tabular(builtin_env(spec.name)));
    } else if (spec.kind == "tabular-file") {
      std::ifstream f(spec.path);
      if (!f) throw ConfigError("cannot open environment file '" + spec.path + "'");
      json j;
      try {
        f >> j;
      } catch (const json::exception& e) {
        throw ConfigError("environment file '" + spec.path + "' is not valid JSON: " + e.what());
      }
      model = std::make_shared<const LinearMdpModel>(embed_tabular(tabular_from_json(j)));
    } else if (spec.kind == "linear-file") {
      model = std::make_shared<const LinearMdpModel>(load_model(spec.path));
    } else {
      throw ConfigError("unknown env.kind '" + spec.kind + "'");
    }
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("invalid environment: ") + e.what());
  }

  ResolvedEnv out{model, to_tabular(*model), {}};
  try {
    out.oracle = solve_average_reward(out.tabular);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string(e.what()) + "\nenvironment dump:\n" + to_json(out.tabular).dump());
  }
  return out;
}

AgentConfig resolve_agent(const AgentSpec& spec, const ResolvedEnv& env, int dim) {
  AgentConfig cfg;
  cfg.horizon = spec.T;
  cfg.lambda = spec.lambda;
  cfg.gamma = spec.gamma_mode == "auto" ? theory_gamma(spec.T) : spec.gamma;
  cfg.H = spec.H_mode == "oracle" ? 2.0 * env.oracle.span : spec.H;
  cfg.beta = spec.beta_mode == "theory"
                 ? theory_beta(spec.c_beta, env.oracle.span, dim, spec.T, spec.delta)
                 : spec.beta;
  cfg.check();
  return cfg;
}

std::unique_ptr<Agent> make_agent(const std::string& algorithm, const ResolvedEnv& env,
                                  const AgentConfig& cfg, Rng agent_rng) {
  if (algorithm == "dc") return std::make_unique<DcAgent>(env.model, cfg);
  if (algorithm == "baseline") return std::make_unique<BaselineAgent>(env.model, cfg);
  if (algorithm == "tabular") {
    if (!env.model->is_one_hot()) {
      throw ConfigError("algorithm 'tabular' needs one-hot features (a tabular environment)");
    }
    return std::make_unique<TabularAgent>(env.model, cfg);
  }
  if (algorithm == "random") return std::make_unique<RandomAgent>(env.model->num_actions(), agent_rng);
  throw ConfigError("unknown algorithm '" + algorithm + "'");
}

// ---------------------------------------------------------------------------
// Runs

RunResult simulate(const ResolvedEnv& env, const AgentSpec& spec, std::uint64_t seed,
                   int initial_state, bool record_timing) {
  using clock = std::chrono::steady_clock;
  const LinearMdpModel& model = *env.model;
  if (initial_state < 0 || initial_state >= model.num_states()) {
    throw ConfigError("run.initial_state " + std::to_string(initial_state) + " is not a state of the environment");
  }
  RunResult res;
  res.seed = seed;
  res.gain = env.oracle.gain;
  res.bias_span = env.oracle.span;
  res.agent_config = resolve_agent(spec, env, model.dim());

  const Rng master(seed);
  Rng env_rng = split(master, Stream::kTransitions);
  auto agent = make_agent(spec.algorithm, env, res.agent_config, split(master, Stream::kAgent));
  PsdMatrixState gram(static_cast<std::size_t>(model.dim()), res.agent_config.lambda);

  const int T = spec.T;
  res.steps.reserve(T);
  res.cum_regret.reserve(T);
  res.threshold.reserve(T);
  res.logdet.reserve(T);
  res.plan_micros.reserve(T);
  const auto start = clock::now();
  double regret = 0.0;
  int s = initial_state;
  for (int t = 1; t <= T; ++t) {
    const auto before = clock::now();
    const int a = agent->act(s);
    const auto after = clock::now();
    const double r = model.reward(s, a);
    const int s_next = sample_next(model, s, a, env_rng);
    res.threshold.push_back(agent->threshold());
    agent->observe(s, a, r, s_next);
    gram.rank1_update(model.phi(s, a));
    regret += res.gain - r;
    res.steps.push_back({t, s, a, r, s_next});
    res.cum_regret.push_back(regret);
    res.logdet.push_back(gram.logdet());
    res.plan_micros.push_back(
        record_timing ? std::chrono::duration<double, std::micro>(after - before).count() : 0.0);
    s = s_next;
  }
  res.regret = regret;
  res.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return res;
}

std::string trace_csv(const RunResult& r) {
  std::string out = "t,s_t,a_t,r_t,J_star,cum_regret,m_t,logdet_Lambda,plan_micros\n";
  out.reserve(out.size() + r.steps.size() * 96);
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const TransitionRecord& st = r.steps[i];
    append_int(out, st.t);
    out += ',';
    append_int(out, st.s);
    out += ',';
    append_int(out, st.a);
    out += ',';
    append_number(out, st.r);
    out += ',';
    append_number(out, r.gain);
    out += ',';
    append_number(out, r.cum_regret[i]);
    out += ',';
    append_number(out, r.threshold[i]);
    out += ',';
    append_number(out, r.logdet[i]);
    out += ',';
    append_number(out, r.plan_micros[i]);
    out += '\n';
  }
  return out;
}

json summary_json(const RunResult& r, const ExperimentConfig& c) {
  return json{{"J_star", r.gain},
              {"sp_v_star", r.bias_span},
              {"R_T", r.regret},
              {"T", r.steps.size()},
              {"seed", r.seed},
              {"wall_clock_seconds", r.wall_seconds},
              {"resolved_agent",
               {{"gamma", r.agent_config.gamma},
                {"lambda", r.agent_config.lambda},
                {"H", r.agent_config.H},
                {"beta", r.agent_config.beta}}},
              {"config", to_json(c)},
              {"code_version", kCodeVersion}};
}

std::vector<RunResult> run(const ExperimentConfig& c, const std::string& out_dir) {
  c.validate();
  const ResolvedEnv env = resolve_env(c.env);
  std::vector<RunResult> results;
  for (int k = 0; k < c.run.num_seeds; ++k) {
    const std::uint64_t seed = c.run.agent_seed + static_cast<std::uint64_t>(k);
    RunResult r = simulate(env, c.agent, seed, c.run.initial_state, c.run.record_timing);
    if (!out_dir.empty()) {
      fs::path dir = out_dir;
      if (c.run.num_seeds > 1) dir /= "seed-" + std::to_string(seed);
      fs::create_directories(dir);
      write_text(dir / "trace.csv", trace_csv(r));
      write_text(dir / "summary.json", summary_json(r, c).dump(2) + "\n");
    }
    results.push_back(std::move(r));
  }
  return results;
}

// ---------------------------------------------------------------------------
// Sweeps

json SweepSummary::to_json() const {
  json per_t = json::array();
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    per_t.push_back({{"T", horizons[i]}, {"mean_R_T", mean[i]}, {"stddev_R_T", stddev[i]}});
  }
  json cell_list = json::array();
  for (const auto& c : cells) {
    cell_list.push_back({{"T", c.T}, {"seed", c.seed}, {"R_T", c.regret}, {"wall_clock_seconds", c.wall_seconds}});
  }
  json j{{"per_T", per_t}, {"cells", cell_list}, {"degenerate", degenerate}};
  if (slope) j["loglog_slope"] = *slope;
  return j;
}

std::optional<double> loglog_slope(const std::vector<int>& horizons, const std::vector<double>& mean) {
  if (horizons.size() != mean.size() || horizons.size() < 2) return std::nullopt;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(mean[i] > 0.0)) return std::nullopt;
    x.push_back(std::log(static_cast<double>(horizons[i])));
    y.push_back(std::log(mean[i]));
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

int worker_count() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AVGRL_THREADS")) {
    int n = 0;
    const std::string_view sv(env);
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), n);
    if (res.ec == std::errc() && n >= 1) return n;
  }
  return static_cast<int>(hw);
}

SweepSummary sweep(const ExperimentConfig& c, const std::vector<int>& horizons, int seeds,
                   const std::string& out_dir, int threads) {
  c.validate();
  if (horizons.empty()) throw ConfigError("sweep: empty T list");
  if (!std::is_sorted(horizons.begin(), horizons.end()) ||
      std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end()) {
    throw ConfigError("sweep: T list must be strictly ascending");
  }
  if (seeds < 1) throw ConfigError("sweep: seed count must be >= 1");
  for (int T : horizons) {
    ExperimentConfig probe = c;
    probe.agent.T = T;
    probe.validate();
  }
  const ResolvedEnv env = resolve_env(c.env);

  std::vector<SweepCell> cells;
  for (int T : horizons) {
    for (int k = 0; k < seeds; ++k) cells.push_back({T, c.run.agent_seed + static_cast<std::uint64_t>(k), 0.0, 0.0});
  }
  if (!out_dir.empty()) fs::create_directories(fs::path(out_dir) / "cells");

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepCell& cell = cells[i];
      try {
        AgentSpec spec = c.agent;
        spec.T = cell.T;
        const RunResult r = simulate(env, spec, cell.seed, c.run.initial_state, false);
        cell.regret = r.regret;
        cell.wall_seconds = r.wall_seconds;
        if (!out_dir.empty()) {
          const json j{{"T", cell.T}, {"seed", cell.seed}, {"R_T", cell.regret},
                       {"wall_clock_seconds", cell.wall_seconds}};
          write_text(fs::path(out_dir) / "cells" /
                         ("T" + std::to_string(cell.T) + "-seed" + std::to_string(cell.seed) + ".json"),
                     j.dump() + "\n");
        }
      } catch (...) {
        const std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads > 0 ? threads : worker_count(),
                                                  static_cast<int>(cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepSummary out;
  out.cells = cells;
  std::sort(out.cells.begin(), out.cells.end(), [](const SweepCell& a, const SweepCell& b) {
    return a.T != b.T ? a.T < b.T : a.seed < b.seed;
  });
  for (int T : horizons) {
    std::vector<double> vals;
    for (const auto& cell : out.cells) {
      if (cell.T == T) vals.push_back(cell.regret);
    }
    const double n = static_cast<double>(vals.size());
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    out.horizons.push_back(T);
    out.mean.push_back(mean);
    out.stddev.push_back(vals.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0);
  }
  if (horizons.size() >= 2) {
    out.degenerate = std::any_of(out.mean.begin(), out.mean.end(), [](double m) { return !(m > 0.0); });
    if (!out.degenerate) out.slope = loglog_slope(out.horizons, out.mean);
  }
  if (!out_dir.empty()) write_text(fs::path(out_dir) / "sweep_summary.json", out.to_json().dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------------------
// Verification suites

bool SuiteEntry::passed() const {
  switch (role) {
    case SuiteRole::kHard:
      return report.violations == 0;
    case SuiteRole::kStatistical:
      return report.pass_fraction() >= min_pass_fraction;
    case SuiteRole::kControl:
      return report.violations > 0;
    case SuiteRole::kInfo:
      return true;
  }
  return false;
}

bool SuiteResult::hard_failure() const {
  return std::any_of(entries.begin(), entries.end(), [](const SuiteEntry& e) {
    return (e.role == SuiteRole::kHard || e.role == SuiteRole::kControl) && !e.passed();
  });
}

bool SuiteResult::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.passed(); });
}

json SuiteResult::to_json() const {
  json arr = json::array();
  for (const auto& e : entries) {
    json j = e.report.to_json();
    switch (e.role) {
      case SuiteRole::kHard:
        j["role"] = "hard";
        break;
      case SuiteRole::kStatistical:
        j["role"] = "statistical";
        j["min_pass_fraction"] = e.min_pass_fraction;
        break;
      case SuiteRole::kControl:
        j["role"] = "negative-control";
        break;
      case SuiteRole::kInfo:
        j["role"] = "info";
        break;
    }
    j["passed"] = e.passed();
    arr.push_back(std::move(j));
  }
  return json{{"reports", arr}, {"hard_failure", hard_failure()}, {"all_passed", all_passed()}};
}

DcTrace record_dc_run(const ResolvedEnv& env, const AgentConfig& cfg, std::uint64_t seed,
                      DcVariant variant, int initial_state) {
  const LinearMdpModel& model = *env.model;
  const Rng master(seed);
  Rng env_rng = split(master, Stream::kTransitions);
  DcAgent agent(env.model, cfg, variant, true);
  int s = initial_state;
  for (int t = 1; t <= cfg.horizon; ++t) {
    const int a = agent.act(s);
    const int s_next = sample_next(model, s, a, env_rng);
    agent.observe(s, a, model.reward(s, a), s_next);
    s = s_next;
  }
  return agent.trace();
}

TabularTrace record_tabular_run(const ResolvedEnv& env, const AgentConfig& cfg, std::uint64_t seed,
                                int initial_state) {
  const LinearMdpModel& model = *env.model;
  const Rng master(seed);
  Rng env_rng = split(master, Stream::kTransitions);
  TabularAgent agent(env.model, cfg, true);
  int s = initial_state;
  for (int t = 1; t <= cfg.horizon; ++t) {
    const int a = agent.act(s);
    const int s_next = sample_next(model, s, a, env_rng);
    agent.observe(s, a, model.reward(s, a), s_next);
    s = s_next;
  }
  return agent.trace();
}

CheckReport lemma2_suite(int num_mdps, std::uint64_t seed, const std::vector<double>& gammas) {
  CheckReport rep;
  rep.suite = "lemma2";
  Rng rng(seed);
  constexpr double kTol = 1e-8;
  for (int i = 0; i < num_mdps; ++i) {
    const int S = 2 + static_cast<int>(rng.below(5));
    const int A = 1 + static_cast<int>(rng.below(3));
    const double eps = 0.05 + 0.25 * rng.uniform();
    const TabularMdp mdp = random_unichain_tabular(S, A, rng, eps);
    for (double gamma : gammas) {
      const Lemma2Report r = check_lemma2(mdp, gamma, kOracleTol, kTol);
      const bool ok = rep.record(2.0 * r.sp_bias - r.sp_discounted, kTol) &
                      rep.record((1.0 - gamma) * r.sp_bias - r.gain_gap, kTol);
      if (!ok && !rep.counterexample) {
        rep.counterexample = "mdp " + std::to_string(i) + " (S=" + std::to_string(S) +
                             ", A=" + std::to_string(A) + ") gamma=" + std::to_string(gamma) +
                             ": " + to_json(mdp).dump();
      }
      rep.metrics["max_sp_ratio"] = std::max(rep.metrics["max_sp_ratio"], r.sp_ratio);
    }
  }
  return rep;
}

CheckReport negative_suite(const std::vector<long>& ns, const std::vector<double>& deltas, double rel_tol) {
  CheckReport rep;
  rep.suite = "negative";
  double worst_rel = 0.0;
  for (long n : ns) {
    for (double delta : deltas) {
      const NegativeResult r = negative_construction(n, delta);
      const double rel = r.relative_error();
      worst_rel = std::max(worst_rel, rel);
      if (!rep.record(rel_tol - rel, 0.0) && !rep.counterexample) {
        std::ostringstream os;
        os.precision(17);
        os << "n=" << n << " delta=" << delta << " observed=" << r.observed << " predicted=" << r.predicted;
        rep.counterexample = os.str();
      }
    }
  }
  rep.metrics["worst_relative_error"] = worst_rel;
  return rep;
}

namespace {

std::vector<int> probes_for(const std::vector<TransitionRecord>& steps, int num_states, std::uint64_t seed) {
  Rng rng = split(Rng(seed), Stream::kProbes);
  return default_probes(steps, num_states, 10, rng);
}

}  // namespace

SuiteResult run_verify_suite(const std::string& name, const ExperimentConfig& c, bool full_u) {
  SuiteResult out;
  auto add = [&](CheckReport r, SuiteRole role, double min_frac = 1.0) {
    out.entries.push_back({std::move(r), role, min_frac});
  };
  if (name == "clip") {
    Rng rng(c.run.agent_seed);
    add(check_clip_properties(100000, rng), SuiteRole::kHard);
    return out;
  }
  if (name == "negative") {
    add(negative_suite({4, 100, 10000}, {0.1, 1.0, 10.0}), SuiteRole::kHard);
    return out;
  }
  if (name == "lemma2") {
    add(lemma2_suite(20, c.env.env_seed, {0.9, 0.99}), SuiteRole::kHard);
    return out;
  }
  if (name != "deviation" && name != "tabular-deviation" && name != "optimism" && name != "step-bound") {
    throw ConfigError("unknown verify suite '" + name +
                      "' (expected clip|deviation|tabular-deviation|optimism|step-bound|lemma2|negative)");
  }

  c.validate();
  const ResolvedEnv env = resolve_env(c.env);
  const AgentConfig cfg = resolve_agent(c.agent, env, env.model->dim());
  const int S = env.model->num_states();

  if (name == "tabular-deviation") {
    if (!env.model->is_one_hot()) throw ConfigError("tabular-deviation needs a tabular environment");
    CheckReport dev, inv, all_pairs;
    for (int k = 0; k < c.run.num_seeds; ++k) {
      const TabularTrace tr = record_tabular_run(env, cfg, c.run.agent_seed + k, c.run.initial_state);
      dev.merge(check_tabular_deviation(tr, false));
      inv.merge(check_tabular_invariants(tr));
      all_pairs.merge(check_tabular_deviation(tr, true));
    }
    dev.suite = "tabular-deviation";
    inv.suite = "tabular-invariants";
    all_pairs.suite = "tabular-deviation-incl-episode-boundaries";
    add(dev, SuiteRole::kHard);
    add(inv, SuiteRole::kHard);
    add(all_pairs, SuiteRole::kInfo);
    return out;
  }

  if (name == "deviation") {
    CheckReport dev, inv, order, mut_clip, mut_thr, ell;
    for (int k = 0; k < c.run.num_seeds; ++k) {
      const std::uint64_t seed = c.run.agent_seed + k;
      const DcTrace tr = record_dc_run(env, cfg, seed, DcVariant::kFaithful, c.run.initial_state);
      const auto probes = probes_for(tr.steps, S, seed);
      dev.merge(check_deviation(tr, probes, full_u));
      inv.merge(check_dc_invariants(tr, probes, full_u));
      order.merge(check_threshold_ordering(tr));
      ell.merge(check_elliptical_potential(tr.potential, env.model->dim()));
      const DcTrace no_clip = record_dc_run(env, cfg, seed, DcVariant::kNoDeviationClip, c.run.initial_state);
      mut_clip.merge(check_deviation(no_clip, probes_for(no_clip.steps, S, seed), full_u));
      const DcTrace frozen = record_dc_run(env, cfg, seed, DcVariant::kFrozenThreshold, c.run.initial_state);
      mut_thr.merge(check_deviation(frozen, probes_for(frozen.steps, S, seed), full_u));
    }
    dev.suite = "deviation";
    inv.suite = "dc-invariants";
    order.suite = "threshold-ordering";
    ell.suite = "elliptical-potential";
    mut_clip.suite = "deviation-mutation-no-clip";
    mut_thr.suite = "deviation-mutation-frozen-threshold";
    add(dev, SuiteRole::kHard);
    add(inv, SuiteRole::kHard);
    add(ell, SuiteRole::kHard);
    add(order, SuiteRole::kInfo);
    add(mut_clip, SuiteRole::kControl);
    add(mut_thr, SuiteRole::kInfo);
    return out;
  }

  // optimism / step-bound share runs
  const Vec v_star_gamma = solve_discounted(env.tabular, cfg.gamma);
  CheckReport opt, step, ell, control;
  AgentConfig zero_beta = cfg;
  zero_beta.beta = 0.0;
  for (int k = 0; k < c.run.num_seeds; ++k) {
    const std::uint64_t seed = c.run.agent_seed + k;
    const DcTrace tr = record_dc_run(env, cfg, seed, DcVariant::kFaithful, c.run.initial_state);
    ell.merge(check_elliptical_potential(tr.potential, env.model->dim()));
    if (name == "optimism") {
      opt.merge(check_optimism(tr, v_star_gamma, full_u));
      const DcTrace z = record_dc_run(env, zero_beta, seed, DcVariant::kFaithful, c.run.initial_state);
      control.merge(check_optimism(z, v_star_gamma, full_u));
    } else {
      step.merge(check_step_upper_bound(tr, full_u));
    }
  }
  ell.suite = "elliptical-potential";
  if (name == "optimism") {
    opt.suite = "optimism";
    control.suite = "optimism-control-beta-0";
    add(opt, SuiteRole::kStatistical, 0.99);
    add(control, SuiteRole::kControl);
  } else {
    step.suite = "step-bound";
    add(step, SuiteRole::kStatistical, 0.99);
  }
  add(ell, SuiteRole::kHard);
  return out;
}

}  // namespace avgrl
