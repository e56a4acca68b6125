#include <benchmark/benchmark.h>

#include "stopt/entry.hpp"
#include "stopt/pre_exit.hpp"
#include "stopt/rng.hpp"
#include "stopt/simulate.hpp"

namespace {

stopt::ModelParams example_params() {
    return {{0.03, 0.2, 0.05}, {0.6, 7.0, 10.0}, {0.1, 0.1}, {0.1, 0.2}};
}

void BM_FastExp(benchmark::State& state) {
    double x = -20.0;
    for (auto _ : state) {
        x += 0.001;
        if (x > 20.0) x = -20.0;
        benchmark::DoNotOptimize(stopt::fast_exp(x));
    }
}
BENCHMARK(BM_FastExp);

void BM_InvNormal(benchmark::State& state) {
    double p = 0.001;
    for (auto _ : state) {
        p += 1e-4;
        if (p > 0.999) p = 0.001;
        benchmark::DoNotOptimize(stopt::inv_normal_cdf(p));
    }
}
BENCHMARK(BM_InvNormal);

// Throughput of the path engine itself, in grid steps per second.
void BM_PostCompetitionPaths(benchmark::State& state) {
    const auto p = example_params();
    const auto pre = stopt::solve_pre_exit(p);
    const stopt::ThresholdStrategy strat{1.0, 100.0, pre.a_star, pre.post.a_tilde_star};
    stopt::McConfig cfg{.n_paths = state.range(0), .dt = 1e-3, .horizon = 100.0, .seed = 7,
                        .antithetic = false, .threads = 1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(stopt::simulate_npv(
            p, strat, stopt::Stage::post_competition, 1.4 * pre.post.a_tilde_star, cfg));
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_paths);
}
BENCHMARK(BM_PostCompetitionPaths)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_PreEntryPaths(benchmark::State& state) {
    const auto p = example_params();
    const auto pre = stopt::solve_pre_exit(p);
    const auto entry = stopt::solve_entry(p, pre);
    const stopt::ThresholdStrategy strat{entry.c_star, entry.e_star, pre.a_star,
                                         pre.post.a_tilde_star};
    stopt::McConfig cfg{.n_paths = state.range(0), .dt = 1e-3, .horizon = 100.0, .seed = 7,
                        .antithetic = false, .threads = 1};
    const double x0 = 0.5 * (entry.c_star + entry.e_star);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            stopt::simulate_npv(p, strat, stopt::Stage::pre_entry, x0, cfg));
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_paths);
}
BENCHMARK(BM_PreEntryPaths)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
