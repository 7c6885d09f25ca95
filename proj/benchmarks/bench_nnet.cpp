#include <benchmark/benchmark.h>

#include <random>

#include "marmo/nnet.hpp"

namespace {

using namespace marmo::nnet;

std::vector<double> random_wave(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<double> w(n);
    for (auto& v : w) v = dist(rng);
    return w;
}

void BM_CnnForward(benchmark::State& state) {
    const auto spec = CNNSpec::for_rate(44100, 3);
    const Model model = Model::init(spec, 11);
    const auto wave = random_wave(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward(wave));
    }
}

void BM_CnnForwardBackward(benchmark::State& state) {
    const auto spec = CNNSpec::for_rate(44100, 3);
    const Model model = Model::init(spec, 11);
    Dataset batch;
    batch.inputs.push_back(random_wave(static_cast<std::size_t>(state.range(0))));
    batch.labels.push_back(1);
    std::vector<Tensor> grads;
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_gradients(model, batch, grads));
    }
}

void BM_MlpForwardBackward(benchmark::State& state) {
    MLPSpec spec;
    spec.input_dim = static_cast<int>(state.range(0));
    spec.n_classes = 10;
    const Model model = Model::init(spec, 3);
    Dataset batch;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 16; ++i) {
        std::vector<double> row(static_cast<std::size_t>(spec.input_dim));
        for (auto& v : row) v = dist(rng);
        batch.inputs.push_back(std::move(row));
        batch.labels.push_back(i % 10);
    }
    std::vector<Tensor> grads;
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_gradients(model, batch, grads));
    }
}

} // namespace

BENCHMARK(BM_CnnForward)->Arg(2205)->Arg(4410);
BENCHMARK(BM_CnnForwardBackward)->Arg(4410);
BENCHMARK(BM_MlpForwardBackward)->Arg(24)->Arg(1536);

BENCHMARK_MAIN();
