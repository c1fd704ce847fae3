// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dataset manifests: an ordered list of labelled samples sharing one feature
// kind and shape, stored as JSON next to per-sample feature files.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faukit/facs.hpp"

namespace faukit {

enum class FeatureKind : std::uint8_t { heatmap, probvec };

std::string_view to_string(FeatureKind kind) noexcept;
FeatureKind parse_feature_kind(std::string_view text);

struct Sample {
    std::uint64_t id = 0;
    /// Feature file path. Relative paths resolve against the manifest's base_dir.
    std::string feature_path;
    /// Inline features; filled by the generator or by load_features().
    std::vector<float> features;
    Emotion emotion = Emotion::neutral;
    std::optional<AuSet> au_truth;
};

struct DatasetManifest {
    FeatureKind kind = FeatureKind::probvec;
    /// {K} for probability vectors, {K, H, W} for heatmap stacks.
    std::vector<std::uint32_t> shape;
    AuVocabulary vocabulary = AuVocabulary::disfa8();
    std::vector<Sample> samples;
    std::filesystem::path base_dir;

    std::size_t feature_dim() const noexcept;
    bool has_au_truth() const noexcept;

    /// Throws ConfigError/DimensionError when the kind, shape, vocabulary and
    /// per-sample data disagree.
    void validate() const;
};

std::string manifest_to_json_text(const DatasetManifest& manifest);
DatasetManifest manifest_from_json_text(std::string_view text, const std::filesystem::path& base_dir);

/// Reads the JSON; features stay on disk until load_features().
DatasetManifest load_manifest(const std::filesystem::path& path);
/// Writes the JSON only. Sample paths are stored as they are.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Writes every inline sample to `dir/features/<id>.faut`, points the sample
/// paths there and sets base_dir to `dir`.
void write_features(DatasetManifest& manifest, const std::filesystem::path& dir);

/// Loads missing inline features from their feature files and checks shapes.
void load_features(DatasetManifest& manifest);

/// Loads the manifest and all its features.
DatasetManifest load_dataset(const std::filesystem::path& manifest_path);

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

/// Largest-remainder rounding of n * ratios. Leftover units go to the largest
/// fractional parts; equal fractions favour the earlier partition
/// (train, then val, then test).
std::array<std::size_t, 3> partition_sizes(std::size_t n, const SplitRatios& ratios);

/// Seeded shuffle, then cut into train/val/test. Each partition keeps the
/// input order of its samples.
std::array<DatasetManifest, 3> split_dataset(const DatasetManifest& manifest, const SplitRatios& ratios,
                                             std::uint64_t seed);

/// Dense row-major view of a dataset, widened to double for training.
struct LabeledMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> x;
    std::vector<Emotion> y;

    std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
};

/// Requires inline features (see load_features()).
LabeledMatrix to_matrix(const DatasetManifest& manifest);

}  // namespace faukit
