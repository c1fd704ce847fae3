// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Evaluation quantities: emotion accuracy and confusion, per-AU binary
// counts with F1/accuracy, and AND/OR consistency of an emotion's AU pair.
// All reductions are integer counts, so results do not depend on order.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faukit/facs.hpp"

namespace faukit {

struct ConfusionMatrix {
    /// counts[true][predicted]
    std::array<std::array<std::uint64_t, kNumEmotions>, kNumEmotions> counts{};

    std::uint64_t total() const noexcept;
    std::uint64_t trace() const noexcept;
};

/// Throws InputError when empty, DimensionError when lengths differ.
ConfusionMatrix confusion_matrix(std::span<const Emotion> predicted, std::span<const Emotion> truth);
double emotion_accuracy(std::span<const Emotion> predicted, std::span<const Emotion> truth);

struct BinaryCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
};

/// F1 = 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1_score(const BinaryCounts& c) noexcept;
/// (tp + tn) / total; 0 for an empty count.
double binary_accuracy(const BinaryCounts& c) noexcept;

/// Per-AU confusion counts over one vocabulary, every sample counted for
/// every AU.
class AuBinaryCounts {
public:
    AuBinaryCounts(const AuVocabulary& vocab, std::span<const AuSet> truth, std::span<const AuSet> predicted);

    const AuVocabulary& vocabulary() const noexcept { return vocab_; }
    const BinaryCounts& counts(int au) const { return counts_.at(vocab_.index_of(au)); }
    std::uint64_t sample_count() const noexcept { return samples_; }

    double f1(int au) const { return f1_score(counts(au)); }
    double accuracy(int au) const { return binary_accuracy(counts(au)); }
    /// Unweighted means over the vocabulary.
    double f1_average() const;
    double accuracy_average() const;

private:
    AuVocabulary vocab_;
    std::vector<BinaryCounts> counts_;
    std::uint64_t samples_ = 0;
};

struct Consistency {
    double both_rate = 0.0;    // every target AU detected
    double either_rate = 0.0;  // at least one target AU detected
    std::uint64_t samples = 0;
};

/// Restricted to samples whose true emotion is `target`: fraction whose
/// predicted AUs contain all of `target_aus`, and fraction that contain at
/// least one. Throws InputError when no sample has the target emotion.
Consistency au_consistency(std::span<const Emotion> truth, std::span<const AuSet> predicted, Emotion target,
                           const AuSet& target_aus);

/// Happiness with AU6 + AU12.
Consistency au_consistency(std::span<const Emotion> truth, std::span<const AuSet> predicted);

struct AuMetricRow {
    int au = 0;
    double f1 = 0.0;
    double accuracy = 0.0;
    BinaryCounts counts;
};

struct EvaluationReport {
    std::optional<double> emotion_accuracy;
    std::optional<ConfusionMatrix> confusion;
    std::vector<AuMetricRow> au_rows;
    std::optional<double> f1_average;
    std::optional<double> accuracy_average;
    std::optional<Consistency> consistency;
    std::uint64_t sample_count = 0;

    void set_au_metrics(const AuBinaryCounts& counts);
};

/// Structured JSON text (stable key order).
std::string report_to_json_text(const EvaluationReport& report);
/// Human-readable tables: accuracy, confusion, per-AU F1/accuracy, AND/OR.
std::string render_report(const EvaluationReport& report);

}  // namespace faukit
