#include <benchmark/benchmark.h>

#include "perr/counting_process.hpp"
#include "perr/edt.hpp"
#include "perr/perr_estimators.hpp"
#include "perr/scenarios.hpp"
#include "perr/simulation.hpp"
#include "perr/survival.hpp"

namespace {

using namespace perr;

const CohortDataset& cohort() {
  static const CohortDataset ds = assemble_matched_cohort(resolve_scenario("t1-6.5-0.0").front(), 7).dataset;
  return ds;
}

void BM_BuildAllEventRows(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_all_event_rows(cohort()));
}
BENCHMARK(BM_BuildAllEventRows)->Unit(benchmark::kMicrosecond);

void BM_FitAg(benchmark::State& state) {
  const SurvivalFrame rows = build_all_event_rows(cohort());
  const SurvivalFrame design = rows.design({{"trt", {"trt"}}, {"post", {"post"}}, {"trt:post", {"trt", "post"}}});
  for (auto _ : state) benchmark::DoNotOptimize(fit(design));
}
BENCHMARK(BM_FitAg)->Unit(benchmark::kMicrosecond);

void BM_PerrAg(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(perr_ag(cohort()));
}
BENCHMARK(BM_PerrAg)->Unit(benchmark::kMicrosecond);

void BM_MultiGapProfile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_multi_gap(cohort(), 5, 10));
}
BENCHMARK(BM_MultiGapProfile)->Unit(benchmark::kMicrosecond);

void BM_OriginalBootstrap(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(perr_original(cohort(), static_cast<int>(state.range(0)), 3));
}
BENCHMARK(BM_OriginalBootstrap)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_MatchedCohort(benchmark::State& state) {
  const ScenarioSpec spec = resolve_scenario("t1-6.5-0.0").front();
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_matched_cohort(spec, seed++));
}
BENCHMARK(BM_MatchedCohort)->Unit(benchmark::kMillisecond);

void BM_Replicate(benchmark::State& state) {
  ScenarioSpec spec = resolve_scenario(state.range(0) ? "edt-30-0.25" : "t1-6.5-0.0").front();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replicate(spec, i++));
}
BENCHMARK(BM_Replicate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
