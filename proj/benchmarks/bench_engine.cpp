#include <benchmark/benchmark.h>

#include "zrp/engine.hpp"
#include "zrp/ensemble.hpp"

using namespace zrp;

namespace {

DynamicsSpec spec_for(std::int64_t N, bool indicator) {
    DynamicsSpec spec;
    if (!indicator) spec.g = RateFunction::from_table({0.0, 1.0, 1.5, 1.75, 1.875});
    spec.N = N;
    return spec;
}

void run_events(benchmark::State& state, bool indicator) {
    const std::int64_t L = state.range(0);
    Rng init(derive_seed(1, "bench:init", 0));
    auto occ = sample_occupancies(1.0, L, init);
    Simulation sim(occ, spec_for(L / 8, indicator), 99);
    double horizon = 0.0;
    std::uint64_t events = 0;
    for (auto _ : state) {
        horizon += 4.0;
        sim.evolve_to_micro(horizon);
        events = sim.events();
    }
    state.counters["events/s"] =
        benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}

void BM_events_constant_rate(benchmark::State& state) { run_events(state, true); }
void BM_events_table_rate(benchmark::State& state) { run_events(state, false); }

void BM_equilibrium_draw(benchmark::State& state) {
    const std::int64_t L = state.range(0);
    Rng rng(7);
    for (auto _ : state) {
        auto occ = sample_occupancies(1.0, L, rng);
        benchmark::DoNotOptimize(occ.data());
    }
    state.SetItemsProcessed(state.iterations() * L);
}

}  // namespace

BENCHMARK(BM_events_constant_rate)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_events_table_rate)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_equilibrium_draw)->Arg(1 << 12)->Arg(1 << 16);

BENCHMARK_MAIN();
