// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "faukit/error.hpp"
#include "json.hpp"

namespace faukit {

std::uint64_t ConfusionMatrix::total() const noexcept {
    std::uint64_t n = 0;
    for (const auto& row : counts)
        for (auto c : row) n += c;
    return n;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
    std::uint64_t n = 0;
    for (std::size_t k = 0; k < kNumEmotions; ++k) n += counts[k][k];
    return n;
}

ConfusionMatrix confusion_matrix(std::span<const Emotion> predicted, std::span<const Emotion> truth) {
    if (predicted.size() != truth.size()) throw DimensionError("prediction and truth lists differ in length");
    if (truth.empty()) throw InputError("no samples to evaluate");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[emotion_id(truth[i])][emotion_id(predicted[i])];
    return cm;
}

double emotion_accuracy(std::span<const Emotion> predicted, std::span<const Emotion> truth) {
    const ConfusionMatrix cm = confusion_matrix(predicted, truth);
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double f1_score(const BinaryCounts& c) noexcept {
    const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
    return denom == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double binary_accuracy(const BinaryCounts& c) noexcept {
    const std::uint64_t n = c.total();
    return n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

AuBinaryCounts::AuBinaryCounts(const AuVocabulary& vocab, std::span<const AuSet> truth,
                               std::span<const AuSet> predicted)
    : vocab_(vocab), counts_(vocab.size()), samples_(truth.size()) {
    if (truth.size() != predicted.size()) throw DimensionError("AU truth and prediction lists differ in length");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t k = 0; k < vocab_.size(); ++k) {
            const int au = vocab_.code_at(k);
            const bool t = truth[i].contains(au);
            const bool p = predicted[i].contains(au);
            BinaryCounts& c = counts_[k];
            if (t && p)
                ++c.tp;
            else if (!t && p)
                ++c.fp;
            else if (t && !p)
                ++c.fn;
            else
                ++c.tn;
        }
    }
}

double AuBinaryCounts::f1_average() const {
    double sum = 0.0;
    for (const auto& c : counts_) sum += f1_score(c);
    return sum / static_cast<double>(counts_.size());
}

double AuBinaryCounts::accuracy_average() const {
    double sum = 0.0;
    for (const auto& c : counts_) sum += binary_accuracy(c);
    return sum / static_cast<double>(counts_.size());
}

Consistency au_consistency(std::span<const Emotion> truth, std::span<const AuSet> predicted, Emotion target,
                           const AuSet& target_aus) {
    if (truth.size() != predicted.size()) throw DimensionError("truth and prediction lists differ in length");
    if (target_aus.empty()) throw ConfigError("consistency needs at least one target AU");
    std::uint64_t n = 0, both = 0, either = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] != target) continue;
        ++n;
        std::size_t hits = 0;
        for (int au : target_aus) hits += predicted[i].contains(au) ? 1 : 0;
        both += hits == target_aus.size() ? 1 : 0;
        either += hits > 0 ? 1 : 0;
    }
    if (n == 0) throw InputError("no " + std::string(to_string(target)) + " samples to evaluate AU consistency on");
    return {static_cast<double>(both) / static_cast<double>(n), static_cast<double>(either) / static_cast<double>(n),
            n};
}

Consistency au_consistency(std::span<const Emotion> truth, std::span<const AuSet> predicted) {
    return au_consistency(truth, predicted, Emotion::happiness, AuSet{6, 12});
}

void EvaluationReport::set_au_metrics(const AuBinaryCounts& counts) {
    au_rows.clear();
    for (int au : counts.vocabulary().codes()) au_rows.push_back({au, counts.f1(au), counts.accuracy(au), counts.counts(au)});
    f1_average = counts.f1_average();
    accuracy_average = counts.accuracy_average();
}

std::string report_to_json_text(const EvaluationReport& r) {
    nlohmann::ordered_json doc;
    doc["samples"] = r.sample_count;
    if (r.emotion_accuracy) doc["emotion_accuracy"] = *r.emotion_accuracy;
    if (r.confusion) {
        nlohmann::ordered_json cm;
        cm["labels"] = nlohmann::json::array();
        for (Emotion e : kAllEmotions) cm["labels"].push_back(to_string(e));
        cm["rows_true_cols_predicted"] = r.confusion->counts;
        doc["confusion"] = std::move(cm);
    }
    if (!r.au_rows.empty()) {
        nlohmann::ordered_json aus = nlohmann::ordered_json::array();
        for (const auto& row : r.au_rows) {
            nlohmann::ordered_json j;
            j["au"] = row.au;
            j["f1"] = row.f1;
            j["accuracy"] = row.accuracy;
            j["tp"] = row.counts.tp;
            j["fp"] = row.counts.fp;
            j["fn"] = row.counts.fn;
            j["tn"] = row.counts.tn;
            aus.push_back(std::move(j));
        }
        doc["au_metrics"] = std::move(aus);
        doc["f1_avg"] = *r.f1_average;
        doc["acc_avg"] = *r.accuracy_average;
    }
    if (r.consistency) {
        doc["consistency"] = {{"both_rate", r.consistency->both_rate},
                              {"either_rate", r.consistency->either_rate},
                              {"samples", r.consistency->samples}};
    }
    return doc.dump(2) + "\n";
}

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

}  // namespace

std::string render_report(const EvaluationReport& r) {
    std::ostringstream out;
    char line[256];
    if (r.emotion_accuracy) {
        std::snprintf(line, sizeof line, "Emotion accuracy: %s (%llu samples)\n", pct(*r.emotion_accuracy).c_str(),
                      static_cast<unsigned long long>(r.sample_count));
        out << line;
    }
    if (r.confusion) {
        out << "\nConfusion (rows = true, cols = predicted)\n";
        out << "           ";
        for (Emotion e : kAllEmotions) {
            std::snprintf(line, sizeof line, "%6.4s", std::string(to_string(e)).c_str());
            out << line;
        }
        out << "\n";
        for (Emotion t : kAllEmotions) {
            std::snprintf(line, sizeof line, "%-11s", std::string(to_string(t)).c_str());
            out << line;
            for (Emotion p : kAllEmotions) {
                std::snprintf(line, sizeof line, "%6llu",
                              static_cast<unsigned long long>(r.confusion->counts[emotion_id(t)][emotion_id(p)]));
                out << line;
            }
            out << "\n";
        }
    }
    if (!r.au_rows.empty()) {
        out << "\nF1 Avg  ";
        for (const auto& row : r.au_rows) {
            std::snprintf(line, sizeof line, "  F1 AU%-3d", row.au);
            out << line;
        }
        out << "  Acc Avg ";
        for (const auto& row : r.au_rows) {
            std::snprintf(line, sizeof line, " Acc AU%-3d", row.au);
            out << line;
        }
        std::snprintf(line, sizeof line, "\n%7s ", pct(*r.f1_average).c_str());
        out << line;
        for (const auto& row : r.au_rows) {
            std::snprintf(line, sizeof line, " %9s", pct(row.f1).c_str());
            out << line;
        }
        std::snprintf(line, sizeof line, "  %7s ", pct(*r.accuracy_average).c_str());
        out << line;
        for (const auto& row : r.au_rows) {
            std::snprintf(line, sizeof line, " %9s", pct(row.accuracy).c_str());
            out << line;
        }
        out << "\n";
    }
    if (r.consistency) {
        std::snprintf(line, sizeof line, "\nAND (both AUs): %s   OR (at least one AU): %s   (%llu samples)\n",
                      pct(r.consistency->both_rate).c_str(), pct(r.consistency->either_rate).c_str(),
                      static_cast<unsigned long long>(r.consistency->samples));
        out << line;
    }
    return out.str();
}

}  // namespace faukit
