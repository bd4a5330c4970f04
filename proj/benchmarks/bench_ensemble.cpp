#include <benchmark/benchmark.h>

#include "zrp/ensemble.hpp"

using namespace zrp;

namespace {

void BM_canonical_mean_g(benchmark::State& state) {
    const std::int64_t K = state.range(0);
    const RateFunction g = RateFunction::from_table({0.0, 1.0, 1.5, 1.75, 1.875});
    for (auto _ : state) {
        benchmark::DoNotOptimize(canonical_mean_g(K, 2 * K, g));
    }
}

void BM_fugacity_marginal(benchmark::State& state) {
    const RateFunction g = RateFunction::linear();
    for (auto _ : state) {
        auto m = fugacity_marginal(g, 2.0);
        benchmark::DoNotOptimize(m.density);
    }
}

void BM_solve_fugacity(benchmark::State& state) {
    const RateFunction g = RateFunction::from_table({0.0, 1.0, 1.5, 1.75, 1.875});
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_fugacity(1.5, g));
    }
}

}  // namespace

BENCHMARK(BM_canonical_mean_g)->Arg(16)->Arg(128)->Arg(1024);
BENCHMARK(BM_fugacity_marginal);
BENCHMARK(BM_solve_fugacity);

BENCHMARK_MAIN();
