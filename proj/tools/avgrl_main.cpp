#include "avgrl/errors.hpp"
#include "avgrl/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

std::vector<int> parse_horizons(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int T = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(T);
    } catch (const std::exception&) {
      throw avgrl::ConfigError("--T: '" + item + "' is not an integer");
    }
  }
  return out;
}

avgrl::ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? avgrl::ExperimentConfig{} : avgrl::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-reward linear MDP experiments: runs, sweeps, oracles and lemma checks."};
  app.require_subcommand(0, 1);

  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the default configuration with every field spelled out");

  std::string run_config, run_out;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write trace.csv + summary.json");
  run_cmd->add_option("--config", run_config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", run_out, "Output directory (default: run.out from the config)");

  std::string sweep_config, sweep_T = "250,500,1000", sweep_out;
  int sweep_seeds = 10;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run several seeds per horizon and fit the regret slope");
  sweep_cmd->add_option("--config", sweep_config, "Experiment config (JSON)")->required();
  sweep_cmd->add_option("--T", sweep_T, "Comma-separated ascending horizons")->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep_seeds, "Seeds per horizon")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "Output directory (default: run.out from the config)");

  std::string suite, verify_config;
  bool full = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run a lemma-check suite and print JSON verdicts");
  verify_cmd->add_option("--suite", suite, "clip|deviation|tabular-deviation|optimism|step-bound|lemma2|negative")
      ->required();
  verify_cmd->add_option("--config", verify_config, "Experiment config for run-based suites");
  verify_cmd->add_flag("--full", full, "Check every u instead of the subsample (meant for T <= 100)");

  std::string env_path;
  auto* oracle_cmd = app.add_subcommand("oracle", "Solve an environment file for J*, v*, q*");
  oracle_cmd->add_option("--env", env_path, "Environment file (linmdp-v1 or tabmdp-v1)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (print_config) {
      std::cout << avgrl::to_json(avgrl::ExperimentConfig{}).dump(2) << "\n";
      return kExitPass;
    }
    if (*run_cmd) {
      const auto cfg = avgrl::load_config(run_config);
      const std::string out = run_out.empty() ? cfg.run.out : run_out;
      for (const auto& r : avgrl::run(cfg, out)) {
        std::cout << avgrl::summary_json(r, cfg).dump() << "\n";
      }
      return kExitPass;
    }
    if (*sweep_cmd) {
      const auto cfg = avgrl::load_config(sweep_config);
      const std::string out = sweep_out.empty() ? cfg.run.out : sweep_out;
      const auto summary = avgrl::sweep(cfg, parse_horizons(sweep_T), sweep_seeds, out);
      std::cout << summary.to_json().dump(2) << "\n";
      return kExitPass;
    }
    if (*verify_cmd) {
      const auto result = avgrl::run_verify_suite(suite, config_or_default(verify_config), full);
      std::cout << result.to_json().dump(2) << "\n";
      return result.hard_failure() ? kExitViolation : kExitPass;
    }
    if (*oracle_cmd) {
      const auto model = avgrl::load_model(env_path);
      const auto tab = avgrl::to_tabular(model);
      const auto sol = avgrl::solve_average_reward(tab);
      nlohmann::json j;
      j["gain"] = sol.gain;
      j["bias"] = std::vector<double>(sol.bias.data(), sol.bias.data() + sol.bias.size());
      nlohmann::json q = nlohmann::json::array();
      for (Eigen::Index s = 0; s < sol.qbias.rows(); ++s) {
        std::vector<double> row(static_cast<std::size_t>(sol.qbias.cols()));
        for (Eigen::Index a = 0; a < sol.qbias.cols(); ++a) row[static_cast<std::size_t>(a)] = sol.qbias(s, a);
        q.push_back(row);
      }
      j["qbias"] = q;
      j["span"] = sol.span;
      j["iterations"] = sol.iterations;
      j["bellman_residual"] = avgrl::bellman_residual(tab, sol);
      std::cout << j.dump(2) << "\n";
      return kExitPass;
    }
    std::cout << app.help() << "\n";
    return kExitPass;
  } catch (const avgrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const avgrl::ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
}
