// Serial vs OpenMP session scheduling on statistical agents (no network).
#include <benchmark/benchmark.h>

#include "gamelab/plan.hpp"
#include "gamelab/runner.hpp"

using namespace gamelab;

namespace {

ExperimentPlan make_plan(GameKind game, int sessions) {
  ExperimentPlan plan;
  plan.game = game;
  plan.sessions_per_treatment = sessions;
  plan.seat_a.backend = plan.seat_b.backend = Backend::Statistical;
  plan.timestamps = false;
  return plan;
}

void run(benchmark::State& state, GameKind game, ExecutionMode mode) {
  const auto plan = make_plan(game, static_cast<int>(state.range(0)));
  const auto jobs = plan_jobs(plan);
  for (auto _ : state) {
    MemorySink sink;
    auto out = run_sessions(plan, jobs, sink, mode);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(jobs.size()));
}

void BM_UltimatumSerial(benchmark::State& s) { run(s, GameKind::Ultimatum, ExecutionMode::Serial); }
void BM_UltimatumParallel(benchmark::State& s) { run(s, GameKind::Ultimatum, ExecutionMode::Parallel); }
void BM_DilemmaSerial(benchmark::State& s) { run(s, GameKind::PrisonersDilemma, ExecutionMode::Serial); }
void BM_DilemmaParallel(benchmark::State& s) { run(s, GameKind::PrisonersDilemma, ExecutionMode::Parallel); }

}  // namespace

BENCHMARK(BM_UltimatumSerial)->Arg(25)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UltimatumParallel)->Arg(25)->Arg(250)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DilemmaSerial)->Arg(25)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DilemmaParallel)->Arg(25)->Arg(250)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
