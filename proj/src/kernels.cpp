// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace faukit::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = std::size_t{1} << 15;

// Columns handled per task in dense_input_grad; keeps a batch x block tile of
// dx resident in L2 while rows of w stream past.
constexpr std::size_t kInputBlock = 256;

using index_t = long long;

}  // namespace

void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, DenseShape s) {
    const std::size_t in = s.in;
    const std::size_t out = s.out;
    const std::size_t batch = s.batch;
    const index_t quads = static_cast<index_t>((batch + 3) / 4);
    const double* W = w.data();
    const double* X = x.data();
    double* Y = y.data();

#pragma omp parallel for collapse(2) schedule(static) if (batch * in * out > kParallelWork)
    for (index_t o = 0; o < static_cast<index_t>(out); ++o) {
        for (index_t q = 0; q < quads; ++q) {
            const double* wr = W + static_cast<std::size_t>(o) * in;
            const std::size_t b0 = static_cast<std::size_t>(q) * 4;
            if (b0 + 4 <= batch) {
                const double* x0 = X + b0 * in;
                const double* x1 = x0 + in;
                const double* x2 = x1 + in;
                const double* x3 = x2 + in;
                double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
#pragma omp simd reduction(+ : a0, a1, a2, a3)
                for (std::size_t i = 0; i < in; ++i) {
                    const double wi = wr[i];
                    a0 += wi * x0[i];
                    a1 += wi * x1[i];
                    a2 += wi * x2[i];
                    a3 += wi * x3[i];
                }
                Y[(b0 + 0) * out + o] = a0 + bias[o];
                Y[(b0 + 1) * out + o] = a1 + bias[o];
                Y[(b0 + 2) * out + o] = a2 + bias[o];
                Y[(b0 + 3) * out + o] = a3 + bias[o];
            } else {
                for (std::size_t b = b0; b < batch; ++b) {
                    const double* xr = X + b * in;
                    double a = 0.0;
#pragma omp simd reduction(+ : a)
                    for (std::size_t i = 0; i < in; ++i) a += wr[i] * xr[i];
                    Y[b * out + o] = a + bias[o];
                }
            }
        }
    }
}

void dense_weight_grad(std::span<const double> delta, std::span<const double> x, std::span<double> dw,
                       std::span<double> db, DenseShape s) {
    const std::size_t in = s.in;
    const std::size_t out = s.out;
    const std::size_t batch = s.batch;
    const double* D = delta.data();
    const double* X = x.data();

#pragma omp parallel for schedule(static) if (batch * in * out > kParallelWork)
    for (index_t oi = 0; oi < static_cast<index_t>(out); ++oi) {
        const std::size_t o = static_cast<std::size_t>(oi);
        double* dwr = dw.data() + o * in;
        std::size_t b = 0;
        for (; b + 4 <= batch; b += 4) {
            const double d0 = D[(b + 0) * out + o];
            const double d1 = D[(b + 1) * out + o];
            const double d2 = D[(b + 2) * out + o];
            const double d3 = D[(b + 3) * out + o];
            if (d0 == 0.0 && d1 == 0.0 && d2 == 0.0 && d3 == 0.0) continue;
            const double* x0 = X + b * in;
            const double* x1 = x0 + in;
            const double* x2 = x1 + in;
            const double* x3 = x2 + in;
#pragma omp simd
            for (std::size_t i = 0; i < in; ++i) dwr[i] += d0 * x0[i] + d1 * x1[i] + d2 * x2[i] + d3 * x3[i];
        }
        for (; b < batch; ++b) {
            const double d = D[b * out + o];
            if (d == 0.0) continue;
            const double* xr = X + b * in;
#pragma omp simd
            for (std::size_t i = 0; i < in; ++i) dwr[i] += d * xr[i];
        }
        double acc = db[o];
        for (std::size_t bb = 0; bb < batch; ++bb) acc += D[bb * out + o];
        db[o] = acc;
    }
}

void dense_input_grad(std::span<const double> delta, std::span<const double> w, std::span<double> dx,
                      DenseShape s) {
    const std::size_t in = s.in;
    const std::size_t out = s.out;
    const std::size_t batch = s.batch;
    const index_t blocks = static_cast<index_t>((in + kInputBlock - 1) / kInputBlock);
    const double* D = delta.data();
    const double* W = w.data();
    double* DX = dx.data();

#pragma omp parallel for schedule(static) if (batch * in * out > kParallelWork)
    for (index_t blk = 0; blk < blocks; ++blk) {
        const std::size_t i0 = static_cast<std::size_t>(blk) * kInputBlock;
        const std::size_t i1 = std::min(in, i0 + kInputBlock);
        for (std::size_t b = 0; b < batch; ++b) std::fill(DX + b * in + i0, DX + b * in + i1, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double* wr = W + o * in;
            for (std::size_t b = 0; b < batch; ++b) {
                const double d = D[b * out + o];
                if (d == 0.0) continue;
                double* dxr = DX + b * in;
#pragma omp simd
                for (std::size_t i = i0; i < i1; ++i) dxr[i] += d * wr[i];
            }
        }
    }
}

void relu(std::span<double> values) {
    double* v = values.data();
    const index_t n = static_cast<index_t>(values.size());
#pragma omp parallel for simd schedule(static) if (values.size() > kParallelWork)
    for (index_t i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
}

void sgd_step(std::span<double> param, std::span<const double> grad, double learning_rate) {
    double* p = param.data();
    const double* g = grad.data();
    const index_t n = static_cast<index_t>(param.size());
#pragma omp parallel for simd schedule(static) if (param.size() > kParallelWork)
    for (index_t i = 0; i < n; ++i) p[i] -= learning_rate * g[i];
}

void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
               const AdamCoeffs& c) {
    const double t = static_cast<double>(c.step);
    const double correct1 = 1.0 - std::pow(c.beta1, t);
    const double correct2 = 1.0 - std::pow(c.beta2, t);
    const double b1 = c.beta1, b2 = c.beta2, lr = c.learning_rate, eps = c.epsilon;
    double* p = param.data();
    const double* g = grad.data();
    double* M = m.data();
    double* V = v.data();
    const index_t n = static_cast<index_t>(param.size());
#pragma omp parallel for simd schedule(static) if (param.size() > kParallelWork)
    for (index_t i = 0; i < n; ++i) {
        M[i] = b1 * M[i] + (1.0 - b1) * g[i];
        V[i] = b2 * V[i] + (1.0 - b2) * g[i] * g[i];
        const double m_hat = M[i] / correct1;
        const double v_hat = V[i] / correct2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace faukit::kernels
