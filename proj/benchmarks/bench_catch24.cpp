#include <benchmark/benchmark.h>

#include <random>

#include "marmo/catch24.hpp"

namespace {

std::vector<double> noise_series(std::size_t n) {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = dist(rng);
    return x;
}

void BM_Catch24(benchmark::State& state) {
    const auto x = noise_series(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(marmo::catch24::compute_catch24(x));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

// typical segment lengths: 127 ms at 16 kHz and 44.1 kHz
BENCHMARK(BM_Catch24)->Arg(2048)->Arg(5600)->Arg(22050);
