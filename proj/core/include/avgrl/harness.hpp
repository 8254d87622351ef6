#pragma once

#include "avgrl/agents.hpp"
#include "avgrl/envs.hpp"
#include "avgrl/oracle.hpp"
#include "avgrl/verify.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace avgrl {

inline constexpr const char* kCodeVersion = "0.1.0";

struct EnvSpec {
  // tabular-random | tabular-file | linear-file | linear-random | builtin
  std::string kind = "tabular-random";
  int num_states = 3;
  int num_actions = 2;
  double epsilon_mix = 0.2;
  std::uint64_t env_seed = 1;
  std::string path;            // *-file kinds
  int dim = 3;                 // linear-random
  std::string name = "river";  // builtin
};

struct AgentSpec {
  std::string algorithm = "dc";  // dc | baseline | tabular | random
  int T = 300;
  std::string gamma_mode = "auto";  // auto | explicit
  double gamma = 0.9;
  double lambda = 1.0;
  std::string H_mode = "oracle";  // oracle | explicit
  double H = 1.0;
  std::string beta_mode = "theory";  // theory | explicit
  double c_beta = 0.01;
  double delta = 0.1;
  double beta = 0.0;
};

struct RunSpec {
  std::uint64_t agent_seed = 1;
  int num_seeds = 1;
  std::string out = "avgrl-out";
  bool record_timing = false;  // plan_micros stays 0 otherwise, keeping CSVs byte-stable
  int initial_state = 0;
};

struct ExperimentConfig {
  EnvSpec env;
  AgentSpec agent;
  RunSpec run;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys and wrong types are ConfigErrors.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Fixed hand-built environments. "river": three states in a line, a small
/// sure reward at the left end and a larger reward at the right end that is
/// only reachable by pushing against a drift. "two-state": the deterministic
/// 2-state swap example. "constant": every reward 0.5.
TabularMdp builtin_env(const std::string& name);

struct ResolvedEnv {
  std::shared_ptr<const LinearMdpModel> model;
  TabularMdp tabular;
  OracleSolution oracle;
};

/// Builds the model and solves it. Oracle failures rethrow with a dump of the
/// environment attached.
ResolvedEnv resolve_env(const EnvSpec& spec);
AgentConfig resolve_agent(const AgentSpec& spec, const ResolvedEnv& env, int dim);

std::unique_ptr<Agent> make_agent(const std::string& algorithm, const ResolvedEnv& env,
                                  const AgentConfig& cfg, Rng agent_rng);

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<TransitionRecord> steps;
  std::vector<double> cum_regret;
  std::vector<double> threshold;  // m_t in force at step t (NaN if the agent has none)
  std::vector<double> logdet;     // log det Lambda after observing step t
  std::vector<double> plan_micros;
  double gain = 0.0;
  double bias_span = 0.0;
  double regret = 0.0;
  double wall_seconds = 0.0;
  AgentConfig agent_config;
};

/// One plan/act/observe loop of T steps. Streams for the environment and the
/// agent are split from `seed`.
RunResult simulate(const ResolvedEnv& env, const AgentSpec& agent, std::uint64_t seed,
                   int initial_state = 0, bool record_timing = false);

std::string trace_csv(const RunResult& r);
nlohmann::json summary_json(const RunResult& r, const ExperimentConfig& c);

/// Runs run.num_seeds seeds (agent_seed, agent_seed+1, ...). One seed writes
/// <out>/trace.csv and <out>/summary.json; several write <out>/seed-<k>/...
std::vector<RunResult> run(const ExperimentConfig& c, const std::string& out_dir);

struct SweepCell {
  int T = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  double wall_seconds = 0.0;
};

struct SweepSummary {
  std::vector<int> horizons;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<SweepCell> cells;  // sorted by (T, seed)
  std::optional<double> slope;   // absent for a single T or when degenerate
  bool degenerate = false;       // some mean R_T <= 0, so log is undefined
  nlohmann::json to_json() const;
};

/// Least-squares slope of log(mean) against log(T).
std::optional<double> loglog_slope(const std::vector<int>& horizons, const std::vector<double>& mean);

/// Worker count: AVGRL_THREADS if set, else hardware concurrency.
int worker_count();

/// Runs `seeds` seeds for each T on a worker pool. When out_dir is non-empty
/// every finished cell is persisted immediately as <out_dir>/cells/T<T>-seed<k>.json.
SweepSummary sweep(const ExperimentConfig& c, const std::vector<int>& horizons, int seeds,
                   const std::string& out_dir = "", int threads = 0);

// ---------------------------------------------------------------------------
// Verification suites shared by the CLI and the acceptance binary.

enum class SuiteRole {
  kHard,         // any violation fails the suite
  kStatistical,  // passes when pass_fraction >= min_pass_fraction; never a hard failure
  kControl,      // deliberately broken variant: must show at least one violation
  kInfo,         // reported only
};

struct SuiteEntry {
  CheckReport report;
  SuiteRole role = SuiteRole::kHard;
  double min_pass_fraction = 1.0;
  bool passed() const;
};

struct SuiteResult {
  std::vector<SuiteEntry> entries;
  /// A hard check has violations or a control failed to fail.
  bool hard_failure() const;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

/// Runs a DC agent with generation recording on the configured env.
DcTrace record_dc_run(const ResolvedEnv& env, const AgentConfig& cfg, std::uint64_t seed,
                      DcVariant variant = DcVariant::kFaithful, int initial_state = 0);
TabularTrace record_tabular_run(const ResolvedEnv& env, const AgentConfig& cfg, std::uint64_t seed,
                                int initial_state = 0);

CheckReport lemma2_suite(int num_mdps, std::uint64_t seed, const std::vector<double>& gammas);
CheckReport negative_suite(const std::vector<long>& ns, const std::vector<double>& deltas,
                           double rel_tol = 1e-9);

/// Suite names: clip, deviation, tabular-deviation, optimism, step-bound,
/// lemma2, negative. The env/agent/seed parts of the config drive the
/// run-based suites. Throws ConfigError on an unknown name.
SuiteResult run_verify_suite(const std::string& name, const ExperimentConfig& c, bool full_u = false);

}  // namespace avgrl
