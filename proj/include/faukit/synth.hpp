// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Synthetic AU data: Gaussian heatmap rendering and seeded generation of
// labelled datasets from emotion prototypes.

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "faukit/dataset.hpp"
#include "faukit/facs.hpp"
#include "faukit/tensor_io.hpp"

namespace faukit {

struct GridPoint {
    double row = 0.0;
    double col = 0.0;
};

/// K response maps of H x W cells, channel-major then row-major.
struct HeatmapStack {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;

    HeatmapStack() = default;
    HeatmapStack(std::size_t k, std::size_t h, std::size_t w) : channels(k), height(h), width(w), values(k * h * w) {}

    float at(std::size_t c, std::size_t r, std::size_t col) const { return values[(c * height + r) * width + col]; }
    float& at(std::size_t c, std::size_t r, std::size_t col) { return values[(c * height + r) * width + col]; }

    FeatureTensor to_tensor() const;
    static HeatmapStack from_tensor(const FeatureTensor& t);
};

/// Default AU centre table on a 24x24 grid: upper-face AUs in rows 4-9,
/// lower-face AUs in rows 14-20.
std::map<int, GridPoint> default_au_centers();

/// default_au_centers() rescaled to an H x W grid, rounded to whole cells.
std::map<int, GridPoint> scaled_au_centers(std::size_t height, std::size_t width);

struct GenConfig {
    std::size_t n_samples = 700;
    std::uint64_t seed = 42;
    /// Heatmaps: per-cell additive Gaussian noise, clamped at 0.
    /// Probability vectors: bounded jitter that never crosses the threshold.
    double noise_sigma = 0.0;
    /// Chance that each non-prototype AU is activated as well.
    double spurious_rate = 0.0;
    double intensity_lo = 0.6;
    double intensity_hi = 1.0;
    std::size_t grid_height = 24;
    std::size_t grid_width = 24;
    double gaussian_sigma = 2.0;
    std::map<int, GridPoint> au_centers = default_au_centers();

    /// Throws ConfigError on out-of-range values or centres outside the grid.
    void validate() const;
};

/// Channel k holds intensity * exp(-d^2 / (2 sigma^2)) around the centre of
/// vocab.code_at(k) when that AU is active, zeros otherwise. With
/// noise_sigma > 0 every cell gets additive noise drawn from `rng`, then is
/// clamped at zero.
HeatmapStack render_heatmap(const std::map<int, double>& active, const AuVocabulary& vocab, const GenConfig& cfg,
                            std::mt19937_64& rng);

/// Noise-free overload.
HeatmapStack render_heatmap(const std::map<int, double>& active, const AuVocabulary& vocab, const GenConfig& cfg);

/// Seeded dataset with inline features. Every sample draws from its own
/// stream derived from (seed, sample index), so the result does not depend on
/// how generation is scheduled across threads.
DatasetManifest generate_dataset(const GenConfig& cfg, const EmotionRuleSet& rules, const AuVocabulary& vocab,
                                 FeatureKind kind);

/// SplitMix64 finaliser; used to derive independent per-index seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace faukit
