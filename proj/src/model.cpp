// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "faukit/error.hpp"
#include "faukit/kernels.hpp"

namespace faukit {

std::string_view to_string(HeadKind head) noexcept { return head == HeadKind::heatmap5 ? "heatmap5" : "probvec1"; }

HeadKind parse_head_kind(std::string_view text) {
    if (text == "heatmap5") return HeadKind::heatmap5;
    if (text == "probvec1") return HeadKind::probvec1;
    throw ConfigError("unknown head '" + std::string(text) + "' (expected heatmap5 or probvec1)");
}

// --- construction ------------------------------------------------------------

BottleneckModel::BottleneckModel(std::vector<LayerSpec> specs, std::uint64_t init_seed) : init_seed_(init_seed) {
    layers_.reserve(specs.size());
    for (const auto& s : specs) layers_.push_back(DenseLayer{s, {}, {}});
    validate();

    std::mt19937_64 rng(init_seed);
    for (auto& layer : layers_) {
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.spec.in_dim));
        std::uniform_real_distribution<double> dist(-bound, bound);
        layer.weights.resize(layer.spec.out_dim * layer.spec.in_dim);
        for (auto& w : layer.weights) w = dist(rng);
        layer.bias.assign(layer.spec.out_dim, 0.0);
    }
}

BottleneckModel BottleneckModel::from_layers(std::vector<DenseLayer> layers, std::uint64_t init_seed) {
    BottleneckModel m;
    m.layers_ = std::move(layers);
    m.init_seed_ = init_seed;
    m.validate();
    for (const auto& layer : m.layers_) {
        if (layer.weights.size() != layer.spec.in_dim * layer.spec.out_dim || layer.bias.size() != layer.spec.out_dim)
            throw DimensionError("layer parameter arrays do not match the layer spec");
    }
    return m;
}

BottleneckModel BottleneckModel::heatmap_head(std::uint64_t init_seed, std::size_t channels, std::size_t height,
                                              std::size_t width) {
    std::vector<LayerSpec> specs;
    std::size_t in = channels * height * width;
    for (std::size_t hidden : kHeatmapHiddenDims) {
        specs.push_back({in, hidden, Activation::relu});
        in = hidden;
    }
    specs.push_back({in, kNumEmotions, Activation::none});
    return BottleneckModel(std::move(specs), init_seed);
}

BottleneckModel BottleneckModel::probvec_head(std::uint64_t init_seed, std::size_t au_count) {
    return BottleneckModel({{au_count, kNumEmotions, Activation::none}}, init_seed);
}

void BottleneckModel::validate() const {
    if (layers_.empty()) throw ConfigError("a bottleneck needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& s = layers_[i].spec;
        if (s.in_dim == 0 || s.out_dim == 0) throw ConfigError("layer " + std::to_string(i) + " has a zero dimension");
        if (i + 1 < layers_.size() && s.out_dim != layers_[i + 1].spec.in_dim)
            throw ConfigError("layer " + std::to_string(i) + " outputs " + std::to_string(s.out_dim) +
                              " values but layer " + std::to_string(i + 1) + " expects " +
                              std::to_string(layers_[i + 1].spec.in_dim));
    }
    if (layers_.back().spec.out_dim != kNumEmotions) throw ConfigError("the last layer must have 7 outputs");
    if (layers_.back().spec.activation != Activation::none)
        throw ConfigError("the last layer must not have an activation");
}

std::vector<LayerSpec> BottleneckModel::specs() const {
    std::vector<LayerSpec> out;
    for (const auto& l : layers_) out.push_back(l.spec);
    return out;
}

std::size_t BottleneckModel::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

bool operator==(const BottleneckModel& a, const BottleneckModel& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
        const auto& la = a.layers_[i];
        const auto& lb = b.layers_[i];
        if (!(la.spec == lb.spec) || la.weights != lb.weights || la.bias != lb.bias) return false;
    }
    return true;
}

// --- forward -----------------------------------------------------------------

Logits BottleneckModel::forward(std::span<const double> x) const {
    if (x.size() != input_dim())
        throw DimensionError("input has " + std::to_string(x.size()) + " values, model expects " +
                             std::to_string(input_dim()));
    std::vector<double> current(x.begin(), x.end());
    std::vector<double> next;
    for (const auto& layer : layers_) {
        next.assign(layer.spec.out_dim, 0.0);
        kernels::dense_forward(layer.weights, layer.bias, current, next, {1, layer.spec.in_dim, layer.spec.out_dim});
        if (layer.spec.activation == Activation::relu) kernels::relu(next);
        current.swap(next);
    }
    Logits logits{};
    std::copy(current.begin(), current.end(), logits.begin());
    return logits;
}

void forward_batch(const BottleneckModel& model, std::span<const double> x, std::size_t batch, ForwardCache& cache) {
    if (x.size() != batch * model.input_dim())
        throw DimensionError("batch input has " + std::to_string(x.size()) + " values, expected " +
                             std::to_string(batch * model.input_dim()));
    cache.batch = batch;
    cache.outputs.resize(model.layer_count());
    std::span<const double> input = x;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const DenseLayer& layer = model.layer(l);
        auto& out = cache.outputs[l];
        out.resize(batch * layer.spec.out_dim);
        kernels::dense_forward(layer.weights, layer.bias, input, out, {batch, layer.spec.in_dim, layer.spec.out_dim});
        if (layer.spec.activation == Activation::relu) kernels::relu(out);
        input = out;
    }
}

// --- loss --------------------------------------------------------------------

Probabilities softmax(std::span<const double> logits) {
    if (logits.size() != kNumEmotions)
        throw DimensionError("softmax expects 7 logits, got " + std::to_string(logits.size()));
    for (double z : logits)
        if (!std::isfinite(z)) throw NumericError("non-finite logit");
    const double peak = *std::max_element(logits.begin(), logits.end());
    Probabilities p{};
    double total = 0.0;
    for (std::size_t k = 0; k < kNumEmotions; ++k) {
        p[k] = std::exp(logits[k] - peak);
        total += p[k];
    }
    for (auto& v : p) v /= total;
    return p;
}

double cross_entropy(const Probabilities& probs, Emotion y) {
    const double py = probs[emotion_id(y)];
    if (!(py > 0.0) || !std::isfinite(py)) throw NumericError("probability of the true label underflowed");
    return -std::log(py);
}

// --- gradients ---------------------------------------------------------------

Gradients Gradients::zeros_like(const BottleneckModel& model) {
    Gradients g;
    for (const auto& layer : model.layers())
        g.layers.push_back({std::vector<double>(layer.weights.size(), 0.0), std::vector<double>(layer.bias.size(), 0.0)});
    return g;
}

void Gradients::zero() {
    for (auto& l : layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
}

double sample_loss(const BottleneckModel& model, std::span<const double> x, Emotion y) {
    return cross_entropy(softmax(model.forward(x)), y);
}

double backward_batch(const BottleneckModel& model, std::span<const double> x, std::span<const Emotion> y,
                      double l2_weight, Gradients& grads, BackwardWorkspace& ws) {
    const std::size_t batch = y.size();
    if (batch == 0) throw InputError("empty batch");
    forward_batch(model, x, batch, ws.cache);
    if (grads.layers.size() != model.layer_count()) grads = Gradients::zeros_like(model);

    // dL/dlogits = (softmax - onehot) / batch for the mean loss.
    const auto& logits = ws.cache.outputs.back();
    ws.delta.assign(batch * kNumEmotions, 0.0);
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const Probabilities p = softmax(std::span<const double>(logits.data() + b * kNumEmotions, kNumEmotions));
        loss += cross_entropy(p, y[b]);
        for (std::size_t k = 0; k < kNumEmotions; ++k)
            ws.delta[b * kNumEmotions + k] = (p[k] - (k == emotion_id(y[b]) ? 1.0 : 0.0)) * scale;
    }
    loss *= scale;

    for (std::size_t li = model.layer_count(); li-- > 0;) {
        const DenseLayer& layer = model.layer(li);
        const kernels::DenseShape shape{batch, layer.spec.in_dim, layer.spec.out_dim};
        std::span<const double> input = li == 0 ? x : std::span<const double>(ws.cache.outputs[li - 1]);
        LayerGradient& g = grads.layers[li];
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
        kernels::dense_weight_grad(ws.delta, input, g.weights, g.bias, shape);

        if (l2_weight > 0.0) {
            double sq = 0.0;
            for (std::size_t i = 0; i < layer.weights.size(); ++i) {
                g.weights[i] += l2_weight * layer.weights[i];
                sq += layer.weights[i] * layer.weights[i];
            }
            loss += 0.5 * l2_weight * sq;
        }

        if (li == 0) break;
        ws.upstream.resize(batch * layer.spec.in_dim);
        kernels::dense_input_grad(ws.delta, layer.weights, ws.upstream, shape);
        if (model.layer(li - 1).spec.activation == Activation::relu) {
            const auto& act = ws.cache.outputs[li - 1];
            for (std::size_t j = 0; j < ws.upstream.size(); ++j)
                if (!(act[j] > 0.0)) ws.upstream[j] = 0.0;
        }
        ws.delta.swap(ws.upstream);
    }
    return loss;
}

Gradients backward(const BottleneckModel& model, std::span<const double> x, Emotion y) {
    if (x.size() != model.input_dim())
        throw DimensionError("input has " + std::to_string(x.size()) + " values, model expects " +
                             std::to_string(model.input_dim()));
    Gradients g = Gradients::zeros_like(model);
    BackwardWorkspace ws;
    const Emotion labels[1] = {y};
    backward_batch(model, x, labels, 0.0, g, ws);
    return g;
}

// --- prediction --------------------------------------------------------------

Emotion argmax_label(std::span<const double> scores) {
    if (scores.size() != kNumEmotions) throw DimensionError("expected 7 scores");
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumEmotions; ++k)
        if (scores[k] > scores[best]) best = k;
    return emotion_from_id(best);
}

Prediction predict(const BottleneckModel& model, std::span<const double> x) {
    const Logits z = model.forward(x);
    Prediction p;
    p.probabilities = softmax(z);
    p.label = argmax_label(z);
    return p;
}

std::vector<Prediction> predict_batch(const BottleneckModel& model, std::span<const double> x, std::size_t rows) {
    constexpr std::size_t kChunk = 128;
    const std::size_t dim = model.input_dim();
    if (x.size() != rows * dim) throw DimensionError("prediction matrix does not match the model input");
    std::vector<Prediction> out;
    out.reserve(rows);
    ForwardCache cache;
    for (std::size_t start = 0; start < rows; start += kChunk) {
        const std::size_t n = std::min(kChunk, rows - start);
        forward_batch(model, x.subspan(start * dim, n * dim), n, cache);
        const auto& logits = cache.outputs.back();
        for (std::size_t b = 0; b < n; ++b) {
            std::span<const double> z(logits.data() + b * kNumEmotions, kNumEmotions);
            out.push_back({argmax_label(z), softmax(z)});
        }
    }
    return out;
}

std::vector<double> flatten(const HeatmapStack& stack) {
    return std::vector<double>(stack.values.begin(), stack.values.end());
}

}  // namespace faukit
