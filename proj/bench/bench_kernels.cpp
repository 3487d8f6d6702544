// Serial reference vs OpenMP kernels.  Arg 0 runs serially, 1 in parallel.
#include <benchmark/benchmark.h>

#include "mtgl/bellman.hpp"
#include "mtgl/checks.hpp"
#include "mtgl/ito.hpp"
#include "mtgl/registry.hpp"

namespace {

using namespace mtgl;

Exec exec_arg(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_DoobCheck(benchmark::State& state) {
    CorpusSpec spec;
    spec.depth = 8;
    spec.trials = 500;
    Corpus corpus(spec);
    CheckOptions opt;
    opt.exec = exec_arg(state);
    for (auto _ : state) benchmark::DoNotOptimize(check_doob(corpus, 2.0, opt).worst_ratio);
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(spec.trials));
}
BENCHMARK(BM_DoobCheck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SharpDavisCheck(benchmark::State& state) {
    CorpusSpec spec;
    spec.trials = 500;
    Corpus corpus(spec);
    CheckOptions opt;
    opt.exec = exec_arg(state);
    for (auto _ : state) benchmark::DoNotOptimize(sharp_davis_check(corpus, opt).worst_ratio);
}
BENCHMARK(BM_SharpDavisCheck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ConcavityScan(benchmark::State& state) {
    auto grid = ConcavityGrid::standard();
    for (auto _ : state)
        benchmark::DoNotOptimize(concavity_check(grid, kBellmanGamma, 1e-12, exec_arg(state)).min_residual);
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(grid.size()));
}
BENCHMARK(BM_ConcavityScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ItoRefinement(benchmark::State& state) {
    auto g = GridCadlagPath::scaled_walk(256, 64, 1);
    auto pi = AdaptedGridPartition::epsilon_oscillation(g, 0.25);
    RefineOptions opt;
    opt.exec = exec_arg(state);
    for (auto _ : state) benchmark::DoNotOptimize(refine_converge(g, g, pi, 5, 4, opt).cauchy.back());
}
BENCHMARK(BM_ItoRefinement)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Suite(benchmark::State& state) {
    auto cfg = default_suite(1, 50);
    for (auto _ : state) benchmark::DoNotOptimize(total_violations(run_suite(cfg, exec_arg(state))));
}
BENCHMARK(BM_Suite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
