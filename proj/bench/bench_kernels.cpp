// Serial reference vs OpenMP path for the parallel kernels. Each pair runs
// the same work; the serial variant is the baseline the parallel one must
// reproduce bit-for-bit (checked in the unit tests, not here).

#include <benchmark/benchmark.h>

#include "gridres/scenario.hpp"

using namespace gridres;

namespace {

Execution exec_of(const benchmark::State& s) { return s.range(0) ? Execution::parallel : Execution::serial; }

const ScenarioInputs& inputs() {
    static const ScenarioInputs in = load_inputs(ScenarioConfig{});
    return in;
}

void BM_EmpiricalFailureRate(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(empirical_failure_rate(0.37, 2'000'000, 11, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * 2'000'000);
}

void BM_MeanFailuresPerHour(benchmark::State& state) {
    const auto& in = inputs();
    ScenarioConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            mean_failures_per_hour(in.net, in.wind, in.curves, cfg.repair, cfg.window, 200, 5, exec_of(state)));
}

void BM_ScenarioReplicas(benchmark::State& state) {
    const auto& in = inputs();
    ScenarioConfig cfg;
    cfg.horizon = 80;
    cfg.window = {10, 25};
    cfg.replicas = 4;
    cfg.series = false;
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg, in, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_EmpiricalFailureRate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanFailuresPerHour)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScenarioReplicas)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
