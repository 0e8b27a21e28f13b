#include <benchmark/benchmark.h>

#include "safe_oco/environments.hpp"
#include "safe_oco/harness.hpp"
#include "safe_oco/osoco.hpp"

using namespace safe_oco;

// One OSOCO round (act + feedback) on the reference instance, amortized over a
// full horizon so phase restarts are included.
static void BM_OsocoRound(benchmark::State& state) {
  const EnvConfig env = reference_env();
  const std::int64_t T = state.range(0);
  const EnvTrace trace = make_trace(env, T, 0, 0);
  for (auto _ : state) {
    Osoco algo(configure(OsocoMode::H, env.constants(), T));
    Rng rng = make_stream(0, 0, StreamPurpose::Algorithm);
    for (std::int64_t t = 1; t <= T; ++t) {
      const ActionChoice a = algo.act(rng);
      algo.feedback(round_cost(env, trace, t), round_feedback(env, trace, t, a.x).y);
    }
    benchmark::DoNotOptimize(algo.gram().logdet_V);
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_OsocoRound)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_RunTrial(benchmark::State& state) {
  const EnvConfig env = reference_env();
  AlgoSpec spec;
  spec.kind = static_cast<AlgoKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(spec, env, 1000, 0, 0).final_regret());
  state.SetLabel(to_string(spec.kind));
}
BENCHMARK(BM_RunTrial)
    ->Arg(static_cast<int>(AlgoKind::OsocoH))
    ->Arg(static_cast<int>(AlgoKind::Dpp))
    ->Arg(static_cast<int>(AlgoKind::SoPgd))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
