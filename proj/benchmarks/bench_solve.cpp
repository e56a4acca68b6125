#include <benchmark/benchmark.h>

#include "stopt/entry.hpp"
#include "stopt/pre_exit.hpp"

namespace {

stopt::ModelParams example_params(double alpha) {
    return {{0.03, 0.2, 0.05}, {alpha, 7.0, 10.0}, {0.1, 0.1}, {0.1, 0.2}};
}

void BM_CharRoots(benchmark::State& state) {
    const auto p = example_params(0.6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(stopt::char_roots(p.market, 0.2));
    }
}
BENCHMARK(BM_CharRoots);

void BM_SolvePreExit(benchmark::State& state) {
    const auto p = example_params(state.range(0) == 0 ? 0.6 : 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(stopt::solve_pre_exit(p));
    }
}
BENCHMARK(BM_SolvePreExit)->Arg(0)->Arg(1);

void BM_SolveEntry(benchmark::State& state) {
    const auto p = example_params(state.range(0) == 0 ? 0.6 : 0.3);
    const auto pre = stopt::solve_pre_exit(p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(stopt::solve_entry(p, pre));
    }
}
BENCHMARK(BM_SolveEntry)->Arg(0)->Arg(1);

void BM_ValueEntry(benchmark::State& state) {
    const auto p = example_params(0.6);
    const auto pre = stopt::solve_pre_exit(p);
    const auto entry = stopt::solve_entry(p, pre);
    double x = entry.c_star;
    for (auto _ : state) {
        x = x < entry.e_star ? x * 1.01 : entry.c_star;
        benchmark::DoNotOptimize(stopt::value_entry(entry, p, x));
    }
}
BENCHMARK(BM_ValueEntry);

}  // namespace

BENCHMARK_MAIN();
