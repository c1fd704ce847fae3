// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "faukit/model.hpp"

namespace faukit::testing {

// Plain triple-loop forward pass, written without the library kernels.
inline std::vector<double> oracle_forward(const BottleneckModel& m, const std::vector<double>& x) {
    std::vector<double> a = x;
    for (const auto& layer : m.layers()) {
        std::vector<double> z(layer.spec.out_dim);
        for (std::size_t o = 0; o < layer.spec.out_dim; ++o) {
            double s = layer.bias[o];
            for (std::size_t i = 0; i < layer.spec.in_dim; ++i) s += layer.weights[o * layer.spec.in_dim + i] * a[i];
            z[o] = layer.spec.activation == Activation::relu ? std::max(0.0, s) : s;
        }
        a = std::move(z);
    }
    return a;
}

inline double oracle_loss(const BottleneckModel& m, const std::vector<double>& x, Emotion y) {
    const auto z = oracle_forward(m, x);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    return -(z[emotion_id(y)] - mx - std::log(sum));
}

// Random net with every dim in [2, max_dim] and the final 7-wide layer.
inline BottleneckModel random_net(std::mt19937_64& rng, std::size_t max_dim, std::size_t max_hidden = 2) {
    std::uniform_int_distribution<std::size_t> dim(2, max_dim);
    std::uniform_int_distribution<std::size_t> depth(0, max_hidden);
    std::vector<LayerSpec> specs;
    std::size_t in = dim(rng);
    const std::size_t hidden = depth(rng);
    for (std::size_t h = 0; h < hidden; ++h) {
        const std::size_t out = dim(rng);
        specs.push_back({in, out, Activation::relu});
        in = out;
    }
    specs.push_back({in, kNumEmotions, Activation::none});
    BottleneckModel m(std::move(specs), rng());
    // Non-zero biases exercise the bias gradient.
    std::normal_distribution<double> b(0.0, 0.1);
    for (std::size_t l = 0; l < m.layer_count(); ++l)
        for (auto& v : m.layer(l).bias) v = b(rng);
    return m;
}

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t entries = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps entries
// that are zero up to finite-difference rounding from dominating.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central differences with step h on every weight and bias, compared against
// backward().
inline GradCheck gradient_check(const BottleneckModel& model, const std::vector<double>& x, Emotion y,
                                double h = 1e-5) {
    const Gradients g = backward(model, x, y);
    GradCheck out;
    BottleneckModel probe = model;
    for (std::size_t l = 0; l < probe.layer_count(); ++l) {
        auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double saved = params[i];
                params[i] = saved + h;
                const double up = sample_loss(probe, x, y);
                params[i] = saved - h;
                const double down = sample_loss(probe, x, y);
                params[i] = saved;
                const double numeric = (up - down) / (2.0 * h);
                out.max_rel_error = std::max(out.max_rel_error, relative_error(analytic[i], numeric));
                ++out.entries;
            }
        };
        check(probe.layer(l).weights, g.layers[l].weights);
        check(probe.layer(l).bias, g.layers[l].bias);
    }
    return out;
}

struct CountInterval {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

// Central interval of Binomial(n, p) leaving at most alpha/2 in each tail,
// from the exact pmf.
inline CountInterval binomial_interval(std::size_t n, double p, double alpha) {
    std::vector<double> pmf(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k), nn = static_cast<double>(n);
        pmf[k] = std::exp(std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
                          kk * std::log(p) + (nn - kk) * std::log1p(-p));
    }
    CountInterval ci{0, n};
    double tail = 0.0;
    while (ci.lo < n && tail + pmf[ci.lo] <= alpha / 2.0) tail += pmf[ci.lo++];
    tail = 0.0;
    while (ci.hi > 0 && tail + pmf[ci.hi] <= alpha / 2.0) tail += pmf[ci.hi--];
    return ci;
}

}  // namespace faukit::testing
