// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Desk-scale experiment runners:
//   E1  fine-tune a bottleneck head and report test emotion accuracy,
//   E2  AU read-out fidelity against AU ground truth, with a noise sweep,
//   E3  AND/OR consistency of an emotion's AU pair plus per-sample
//       dual-output (emotion + AUs) explainability records.
//
// The AU detector is an external, frozen black box: its outputs are the
// feature files, so the AU read-out is computed directly from the features
// (threshold the probability vector, or threshold each heatmap channel's max).

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "faukit/dataset.hpp"
#include "faukit/facs.hpp"
#include "faukit/metrics.hpp"
#include "faukit/model.hpp"
#include "faukit/synth.hpp"
#include "faukit/train.hpp"

namespace faukit {

enum class ExperimentKind : std::uint8_t { e1, e2, e3 };

std::string_view to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment(std::string_view text);

/// AU read-out of one feature vector: probvec entries >= tau, or heatmap
/// channels whose maximum is >= tau.
AuSet read_out_aus(std::span<const float> features, const DatasetManifest& layout, double tau);
std::vector<AuSet> read_out_aus(const DatasetManifest& data, double tau);

/// Zeroes the probvec entries / heatmap channels of `aus` in every sample.
void ablate_aus(DatasetManifest& data, const AuSet& aus);

/// Adds sigma * z to every feature value, where z is a standard normal draw
/// from a stream seeded by (seed, sample id); the same z is reused for every
/// sigma. Probabilities are clamped to [0,1], heatmaps at 0.
DatasetManifest perturb_features(const DatasetManifest& data, double sigma, std::uint64_t seed);

/// Randomly permutes emotion labels across the three partitions jointly.
void shuffle_labels(std::array<DatasetManifest, 3>& parts, std::uint64_t seed);

/// Prototypes intersected with the vocabulary (what a detector over `vocab`
/// can possibly confirm).
EmotionRuleSet restrict_rules(const EmotionRuleSet& rules, const AuVocabulary& vocab);

/// Heatmap head for heatmap data, probvec head for probvec data; throws
/// ConfigError when the head does not fit the feature kind.
BottleneckModel make_head(HeadKind head, const DatasetManifest& layout, std::uint64_t init_seed);

/// Emotion accuracy and confusion of `model`, plus AU read-out metrics when
/// the data carries AU truth and AND/OR consistency when Happiness samples
/// are present.
EvaluationReport evaluate(const BottleneckModel& model, const DatasetManifest& data, const EmotionRuleSet& rules);

struct E1Options {
    HeadKind head = HeadKind::probvec1;
    TrainConfig train;
    std::uint64_t init_seed = 42;
};

struct E1Result {
    EvaluationReport report;
    TrainResult training;
};

E1Result run_e1(const DatasetManifest& train_set, const DatasetManifest& val_set, const DatasetManifest& test_set,
                const E1Options& opts);

struct E2Point {
    double sigma = 0.0;
    EvaluationReport report;
};

/// One report per noise level (0 gives the clean read-out). Throws
/// InputError when the data has no AU truth.
std::vector<E2Point> run_e2(const DatasetManifest& test_set, const EmotionRuleSet& rules,
                            const std::vector<double>& noise_levels, std::uint64_t seed);

struct ExplainabilityRecord {
    std::uint64_t sample_id = 0;
    Emotion true_emotion = Emotion::neutral;
    Emotion predicted_emotion = Emotion::neutral;
    AuSet predicted_aus;
    /// Against the full prototype of the predicted emotion.
    MatchResult match = MatchResult::none;
    /// Against the prototype restricted to the data vocabulary.
    MatchResult visible_match = MatchResult::none;
};

struct E3Result {
    EvaluationReport report;
    std::vector<ExplainabilityRecord> records;
    Emotion target = Emotion::happiness;
    AuSet target_aus;
    /// Among records predicted as the target: fraction whose visible match is full.
    std::optional<double> full_match_rate;
};

/// `target` must be covered by the vocabulary (its whole prototype
/// detectable). Throws InputError when no sample has the target emotion.
E3Result run_e3(const BottleneckModel& model, const DatasetManifest& test_set, const EmotionRuleSet& rules,
                Emotion target = Emotion::happiness);

std::string e3_to_json_text(const E3Result& result);
std::string e2_to_json_text(const std::vector<E2Point>& points);

struct ExperimentConfig {
    ExperimentKind which = ExperimentKind::e1;
    /// Directory holding train.json / val.json / test.json. When empty the
    /// data is generated from `gen`.
    std::filesystem::path data_dir;
    GenConfig gen;
    FeatureKind kind = FeatureKind::probvec;
    AuVocabulary vocabulary = AuVocabulary::disfa8();
    SplitRatios split;
    HeadKind head = HeadKind::probvec1;
    std::string rules = "default";
    std::filesystem::path output_dir = "experiment_out";
    std::uint64_t seed = 42;
    TrainConfig train;
    bool shuffle_labels = false;
    std::vector<double> noise_levels = {0.0, 0.1, 0.2, 0.3};
    AuSet ablate;
    /// E3: evaluate this checkpoint instead of training one.
    std::filesystem::path model_path;
    Emotion target = Emotion::happiness;
};

/// Loads or generates the train/val/test partitions for `cfg`.
std::array<DatasetManifest, 3> prepare_data(const ExperimentConfig& cfg);

/// Runs one experiment and writes `<which>_report.json` and `<which>_report.txt`
/// (and the trained model for E1/E3) into cfg.output_dir. Returns the JSON text.
std::string run_experiment(const ExperimentConfig& cfg);

}  // namespace faukit
