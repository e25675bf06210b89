#include <gridstress/case_io.hpp>
#include <gridstress/dc_engine.hpp>
#include <gridstress/stress_metrics.hpp>
#include <gridstress/switching.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace gridstress;

const Network& stressed_118()
{
    static const Network net = scale_load(load_case_file(GRIDSTRESS_BENCH_CASE), 1.05,
                                          {{BusId{40}, 1.05 * 1.16}, {BusId{41}, 1.05 * 2.05}});
    return net;
}

void BM_DcSolve(benchmark::State& state)
{
    const auto& net = stressed_118();
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_dc(net));
    }
}
BENCHMARK(BM_DcSolve)->Unit(benchmark::kMicrosecond);

void BM_PtdfLodf(benchmark::State& state)
{
    const auto& net = stressed_118();
    for (auto _ : state) {
        const SusceptanceSystem system(net);
        benchmark::DoNotOptimize(compute_lodf(compute_ptdf(net, system), net));
    }
}
BENCHMARK(BM_PtdfLodf)->Unit(benchmark::kMillisecond);

void BM_StressReport(benchmark::State& state)
{
    const auto& net = stressed_118();
    for (auto _ : state) {
        benchmark::DoNotOptimize(analyze_stress(net, MonitorSets{}, LimitSet{}));
    }
}
BENCHMARK(BM_StressReport)->Unit(benchmark::kMillisecond);

void BM_PreventiveSearch(benchmark::State& state)
{
    const auto& net = stressed_118();
    StressPolicy policy;
    policy.selection = CandidateSelection::BestInBudget;
    const SearchOptions options{static_cast<std::size_t>(state.range(0)), 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(preventive_search(net, policy, MonitorSets{}, LimitSet{}, options));
    }
}
BENCHMARK(BM_PreventiveSearch)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
