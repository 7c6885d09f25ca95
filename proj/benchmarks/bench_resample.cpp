#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "marmo/resample.hpp"

namespace {

marmo::Waveform make_tone(int rate, double seconds) {
    marmo::Waveform w;
    w.sample_rate = rate;
    const auto n = static_cast<std::size_t>(seconds * rate);
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        w.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 3000.0 * static_cast<double>(i) / rate);
    }
    return w;
}

void BM_Resample44kTo16k(benchmark::State& state) {
    const auto w = make_tone(44100, static_cast<double>(state.range(0)) / 1000.0);
    marmo::ResampleSpec spec;
    spec.target_rate = 16000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(marmo::resample(w, spec));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.samples.size()));
}

void BM_Resample44kTo60kGcd(benchmark::State& state) {
    // 300 kHz -> 60 kHz style integer decimation
    const auto w = make_tone(300000, static_cast<double>(state.range(0)) / 1000.0);
    marmo::ResampleSpec spec;
    spec.target_rate = 60000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(marmo::resample(w, spec));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.samples.size()));
}

} // namespace

BENCHMARK(BM_Resample44kTo16k)->Arg(100)->Arg(1000);
BENCHMARK(BM_Resample44kTo60kGcd)->Arg(100);
