// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

// Reference kernels: textbook loops, no blocking, no threads.

#include <algorithm>
#include <cmath>

#include "faukit/kernels.hpp"

namespace faukit::kernels::serial {

void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, DenseShape s) {
    for (std::size_t b = 0; b < s.batch; ++b)
        for (std::size_t o = 0; o < s.out; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < s.in; ++i) acc += w[o * s.in + i] * x[b * s.in + i];
            y[b * s.out + o] = acc + bias[o];
        }
}

void dense_weight_grad(std::span<const double> delta, std::span<const double> x, std::span<double> dw,
                       std::span<double> db, DenseShape s) {
    for (std::size_t o = 0; o < s.out; ++o)
        for (std::size_t b = 0; b < s.batch; ++b) {
            const double d = delta[b * s.out + o];
            for (std::size_t i = 0; i < s.in; ++i) dw[o * s.in + i] += d * x[b * s.in + i];
            db[o] += d;
        }
}

void dense_input_grad(std::span<const double> delta, std::span<const double> w, std::span<double> dx,
                      DenseShape s) {
    for (std::size_t b = 0; b < s.batch; ++b)
        for (std::size_t i = 0; i < s.in; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < s.out; ++o) acc += delta[b * s.out + o] * w[o * s.in + i];
            dx[b * s.in + i] = acc;
        }
}

void relu(std::span<double> values) {
    for (auto& v : values) v = v > 0.0 ? v : 0.0;
}

void sgd_step(std::span<double> param, std::span<const double> grad, double learning_rate) {
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= learning_rate * grad[i];
}

void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
               const AdamCoeffs& c) {
    const double t = static_cast<double>(c.step);
    const double correct1 = 1.0 - std::pow(c.beta1, t);
    const double correct2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / correct1;
        const double v_hat = v[i] / correct2;
        param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

}  // namespace faukit::kernels::serial
