#include "avgrl/harness.hpp"

#include <benchmark/benchmark.h>

using namespace avgrl;

namespace {

void BM_Rank1Update(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(5);
  PsdMatrixState m(d, 1.0);
  Vec phi(d);
  for (auto _ : state) {
    for (int k = 0; k < d; ++k) phi[k] = rng.uniform() - 0.5;
    m.rank1_update(phi);
    benchmark::DoNotOptimize(m.inv().data());
  }
}
BENCHMARK(BM_Rank1Update)->Arg(4)->Arg(8)->Arg(16);

// Full plan/act/observe loop of the DC agent; cost grows roughly as T^3 d.
void BM_DcRun(benchmark::State& state) {
  EnvSpec e;
  e.kind = "linear-random";
  e.num_states = 20;
  e.num_actions = 3;
  e.dim = 12;
  e.env_seed = 21;
  const ResolvedEnv env = resolve_env(e);
  AgentSpec a;
  a.T = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(env, a, 1).regret);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DcRun)->Arg(125)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Oracle(benchmark::State& state) {
  Rng rng(3);
  const TabularMdp mdp = random_unichain_tabular(static_cast<int>(state.range(0)), 3, rng, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_average_reward(mdp).gain);
}
BENCHMARK(BM_Oracle)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
