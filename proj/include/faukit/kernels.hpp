// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense-layer kernels. The functions in faukit::kernels are OpenMP-parallel
// and blocked; faukit::kernels::serial holds plain loop versions kept as the
// reference for tests and the benchmark.
//
// Layout: weights are out x in row-major, activations are batch x dim
// row-major. Every output element is produced by exactly one thread with a
// fixed summation order, so results do not depend on the thread count.

#include <cstddef>
#include <span>

namespace faukit::kernels {

struct DenseShape {
    std::size_t batch = 1;
    std::size_t in = 0;
    std::size_t out = 0;
};

struct AdamCoeffs {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// 1-based step count, used for bias correction.
    std::size_t step = 1;
};

/// y[b,o] = sum_i w[o,i] x[b,i] + bias[o]
void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, DenseShape s);

/// dw[o,i] += sum_b delta[b,o] x[b,i];  db[o] += sum_b delta[b,o]
void dense_weight_grad(std::span<const double> delta, std::span<const double> x, std::span<double> dw,
                       std::span<double> db, DenseShape s);

/// dx[b,i] = sum_o delta[b,o] w[o,i]
void dense_input_grad(std::span<const double> delta, std::span<const double> w, std::span<double> dx,
                      DenseShape s);

void relu(std::span<double> values);

/// param -= lr * grad
void sgd_step(std::span<double> param, std::span<const double> grad, double learning_rate);

/// Adam with bias-corrected moments.
void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
               const AdamCoeffs& c);

namespace serial {

void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, DenseShape s);
void dense_weight_grad(std::span<const double> delta, std::span<const double> x, std::span<double> dw,
                       std::span<double> db, DenseShape s);
void dense_input_grad(std::span<const double> delta, std::span<const double> w, std::span<double> dx,
                      DenseShape s);
void relu(std::span<double> values);
void sgd_step(std::span<double> param, std::span<const double> grad, double learning_rate);
void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
               const AdamCoeffs& c);

}  // namespace serial

}  // namespace faukit::kernels
