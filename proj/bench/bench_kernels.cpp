// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

// Parallel kernels against the serial reference on the shapes the heatmap
// head actually runs: batch 32 through 5760->2048, 2048->1024 and 256->7.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "faukit/kernels.hpp"

namespace {

using faukit::kernels::DenseShape;

struct Buffers {
    std::vector<double> w, bias, x, y, delta, dx, dw, db;

    explicit Buffers(DenseShape s)
        : w(s.in * s.out), bias(s.out), x(s.batch * s.in), y(s.batch * s.out), delta(s.batch * s.out),
          dx(s.batch * s.in), dw(s.in * s.out), db(s.out) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto* v : {&w, &bias, &x, &delta})
            for (auto& e : *v) e = u(rng);
    }
};

DenseShape shape_of(const benchmark::State& state) {
    return {32, static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1))};
}

void set_flops(benchmark::State& state, DenseShape s) {
    state.counters["GFLOPS"] = benchmark::Counter(2.0 * static_cast<double>(s.batch * s.in * s.out),
                                                  benchmark::Counter::kIsIterationInvariantRate,
                                                  benchmark::Counter::kIs1000);
}

template <auto Kernel>
void BM_Forward(benchmark::State& state) {
    const DenseShape s = shape_of(state);
    Buffers b(s);
    for (auto _ : state) {
        Kernel(b.w, b.bias, b.x, b.y, s);
        benchmark::DoNotOptimize(b.y.data());
    }
    set_flops(state, s);
}

template <auto Kernel>
void BM_WeightGrad(benchmark::State& state) {
    const DenseShape s = shape_of(state);
    Buffers b(s);
    for (auto _ : state) {
        Kernel(b.delta, b.x, b.dw, b.db, s);
        benchmark::DoNotOptimize(b.dw.data());
    }
    set_flops(state, s);
}

template <auto Kernel>
void BM_InputGrad(benchmark::State& state) {
    const DenseShape s = shape_of(state);
    Buffers b(s);
    for (auto _ : state) {
        Kernel(b.delta, b.w, b.dx, s);
        benchmark::DoNotOptimize(b.dx.data());
    }
    set_flops(state, s);
}

void Shapes(benchmark::internal::Benchmark* b) {
    b->Args({5760, 2048})->Args({2048, 1024})->Args({256, 7})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Forward<faukit::kernels::dense_forward>)->Apply(Shapes);
BENCHMARK(BM_Forward<faukit::kernels::serial::dense_forward>)->Apply(Shapes);
BENCHMARK(BM_WeightGrad<faukit::kernels::dense_weight_grad>)->Apply(Shapes);
BENCHMARK(BM_WeightGrad<faukit::kernels::serial::dense_weight_grad>)->Apply(Shapes);
BENCHMARK(BM_InputGrad<faukit::kernels::dense_input_grad>)->Apply(Shapes);
BENCHMARK(BM_InputGrad<faukit::kernels::serial::dense_input_grad>)->Apply(Shapes);

BENCHMARK_MAIN();
