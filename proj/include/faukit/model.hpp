// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The bottleneck classifier head: a chain of fully connected layers mapping a
// flattened AU feature vector to 7 emotion logits. ReLU between layers, no
// activation on the last layer; softmax lives in the loss and in predict().

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "faukit/facs.hpp"
#include "faukit/synth.hpp"

namespace faukit {

enum class Activation : std::uint8_t { none = 0, relu = 1 };

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::relu;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct DenseLayer {
    LayerSpec spec;
    std::vector<double> weights;  // out_dim x in_dim, row-major
    std::vector<double> bias;     // out_dim
};

using Logits = std::array<double, kNumEmotions>;
using Probabilities = std::array<double, kNumEmotions>;

enum class HeadKind : std::uint8_t { heatmap5, probvec1 };

std::string_view to_string(HeadKind head) noexcept;
HeadKind parse_head_kind(std::string_view text);

/// Hidden widths of the heatmap head after the flattened input.
inline constexpr std::array<std::size_t, 4> kHeatmapHiddenDims = {2048, 1024, 512, 256};

class BottleneckModel {
public:
    /// He-uniform weights (bound sqrt(6 / fan_in)) and zero biases drawn from
    /// a stream seeded with `init_seed`. Throws ConfigError when the layer
    /// dims do not chain, the last layer is not 7-wide, or the last layer has
    /// an activation.
    BottleneckModel(std::vector<LayerSpec> specs, std::uint64_t init_seed);

    /// Takes ownership of explicit weights (checkpoints, tests).
    static BottleneckModel from_layers(std::vector<DenseLayer> layers, std::uint64_t init_seed = 0);

    /// channels*height*width -> 2048 -> 1024 -> 512 -> 256 -> 7. The default
    /// 10x24x24 stack gives the 5760-wide input.
    static BottleneckModel heatmap_head(std::uint64_t init_seed, std::size_t channels = 10, std::size_t height = 24,
                                        std::size_t width = 24);
    /// A single K -> 7 layer.
    static BottleneckModel probvec_head(std::uint64_t init_seed, std::size_t au_count);

    std::size_t input_dim() const noexcept { return layers_.front().spec.in_dim; }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    std::span<const DenseLayer> layers() const noexcept { return layers_; }
    DenseLayer& layer(std::size_t i) { return layers_.at(i); }
    const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
    std::vector<LayerSpec> specs() const;
    std::size_t parameter_count() const noexcept;
    std::uint64_t init_seed() const noexcept { return init_seed_; }

    /// Throws DimensionError when x has the wrong length.
    Logits forward(std::span<const double> x) const;

    friend bool operator==(const BottleneckModel& a, const BottleneckModel& b);

private:
    BottleneckModel() = default;
    void validate() const;

    std::vector<DenseLayer> layers_;
    std::uint64_t init_seed_ = 0;
};

/// Per-layer activations of a batched forward pass. outputs[l] is the
/// post-activation output of layer l, batch x out_dim.
struct ForwardCache {
    std::size_t batch = 0;
    std::vector<std::vector<double>> outputs;
};

/// Batched forward pass through the parallel kernels. `x` is batch x input_dim.
void forward_batch(const BottleneckModel& model, std::span<const double> x, std::size_t batch, ForwardCache& cache);

/// Max-subtracted softmax. Throws NumericError for non-finite logits.
Probabilities softmax(std::span<const double> logits);
/// -ln p[y]. Throws NumericError when p[y] is not a positive finite number.
double cross_entropy(const Probabilities& probs, Emotion y);

struct LayerGradient {
    std::vector<double> weights;
    std::vector<double> bias;
};

struct Gradients {
    std::vector<LayerGradient> layers;

    /// Zero-filled gradients shaped like `model`.
    static Gradients zeros_like(const BottleneckModel& model);
    void zero();
};

/// Loss of a single sample.
double sample_loss(const BottleneckModel& model, std::span<const double> x, Emotion y);

/// Exact gradients of cross_entropy(softmax(forward(x)), y) for one sample.
Gradients backward(const BottleneckModel& model, std::span<const double> x, Emotion y);

/// Scratch buffers reused across batches.
struct BackwardWorkspace {
    ForwardCache cache;
    std::vector<double> delta;
    std::vector<double> upstream;
};

/// Mean cross-entropy over the batch plus (l2 / 2) * sum of squared weights;
/// writes the gradient of that objective into `grads` (overwriting it) and
/// returns the objective.
double backward_batch(const BottleneckModel& model, std::span<const double> x, std::span<const Emotion> y,
                      double l2_weight, Gradients& grads, BackwardWorkspace& ws);

struct Prediction {
    Emotion label = Emotion::anger;
    Probabilities probabilities{};
};

/// Index of the largest entry; ties go to the lowest emotion id.
Emotion argmax_label(std::span<const double> scores);

Prediction predict(const BottleneckModel& model, std::span<const double> x);

/// Predictions for every row of a batch x input_dim matrix.
std::vector<Prediction> predict_batch(const BottleneckModel& model, std::span<const double> x, std::size_t rows);

/// Flattens a heatmap stack channel-major, row-major: element (c, r, col)
/// lands at c*H*W + r*W + col.
std::vector<double> flatten(const HeatmapStack& stack);

// Checkpoint ("FAUM"): magic, u16 version = 1, u8 layer count, per layer
// (u32 in, u32 out, u8 activation: 0 none / 1 relu), then for each layer its
// weights (row-major) followed by its biases, as f64. Little-endian.

inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const BottleneckModel& model);
/// Throws FormatError on bad magic, version, dims or truncation.
BottleneckModel decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const BottleneckModel& model, const std::filesystem::path& path);
BottleneckModel load_checkpoint(const std::filesystem::path& path);

}  // namespace faukit
