// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// FACS knowledge layer: the action-unit catalog, AU vocabularies, the seven
// emotion labels, emotion prototypes, and the set operations that connect
// AU activations to emotions.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faukit {

enum class FaceRegion : std::uint8_t { upper, lower };

struct AuCode {
    int code;
    FaceRegion region;
    std::string_view name;
};

/// Every AU the library knows about, sorted by code. AU1-AU7 are upper face,
/// AU9 and above lower face.
std::span<const AuCode> au_catalog();

/// nullptr when the code is not in the catalog.
const AuCode* find_au(int code) noexcept;

/// Throws ConfigError for codes outside the catalog.
FaceRegion region_of(int code);

/// A set of AU codes. Used both for activation sets and for unordered
/// vocabularies.
using AuSet = std::set<int>;

std::string format_au_set(const AuSet& aus);

/// Ordered AU vocabulary: position k of a probability vector or heatmap
/// channel k corresponds to codes()[k].
class AuVocabulary {
public:
    /// Throws ConfigError on an empty list, duplicates or unknown codes.
    explicit AuVocabulary(std::vector<int> codes);

    /// {1,2,4,6,9,12,25,26}: the 8-AU DISFA training subset.
    static AuVocabulary disfa8();
    /// All 12 DISFA-labelled AUs.
    static AuVocabulary disfa12();
    /// The 12 BP4D AUs.
    static AuVocabulary bp4d12();
    /// The 10 channels of the default heatmap stack.
    static AuVocabulary heatmap10();
    static AuVocabulary full_catalog();

    /// Accepts a preset name (disfa8, disfa12, bp4d12, heatmap10, all) or a
    /// comma separated list of codes such as "1,2,4" or "AU6,AU12".
    static AuVocabulary parse(std::string_view text);

    std::size_t size() const noexcept { return codes_.size(); }
    std::span<const int> codes() const noexcept { return codes_; }
    int code_at(std::size_t index) const { return codes_.at(index); }
    bool contains(int code) const noexcept { return index_.contains(code); }
    /// Throws ConfigError when the code is not part of the vocabulary.
    std::size_t index_of(int code) const;
    AuSet as_set() const { return AuSet(codes_.begin(), codes_.end()); }

    friend bool operator==(const AuVocabulary& a, const AuVocabulary& b) { return a.codes_ == b.codes_; }

private:
    std::vector<int> codes_;
    std::map<int, std::size_t> index_;
};

/// Stable label ids: the numeric value is what models predict and what
/// checkpoints and reports store.
enum class Emotion : std::uint8_t {
    anger = 0,
    disgust = 1,
    fear = 2,
    happiness = 3,
    sadness = 4,
    surprise = 5,
    neutral = 6,
};

inline constexpr std::size_t kNumEmotions = 7;

inline constexpr std::array<Emotion, kNumEmotions> kAllEmotions = {
    Emotion::anger,   Emotion::disgust,  Emotion::fear,    Emotion::happiness,
    Emotion::sadness, Emotion::surprise, Emotion::neutral,
};

constexpr std::size_t emotion_id(Emotion e) noexcept { return static_cast<std::size_t>(e); }
/// Throws DomainError outside 0..6.
Emotion emotion_from_id(std::size_t id);
/// Capitalised name, e.g. "Happiness".
std::string_view to_string(Emotion e) noexcept;
/// Case-insensitive; throws ConfigError for unknown names.
Emotion parse_emotion(std::string_view name);

enum class MatchResult : std::uint8_t { full, partial, none };

std::string_view to_string(MatchResult m) noexcept;

/// Emotion -> prototype AU set, plus the binarisation threshold.
class EmotionRuleSet {
public:
    /// Validates: every AU in the catalog, Neutral empty, threshold in (0,1).
    EmotionRuleSet(std::array<AuSet, kNumEmotions> prototypes, double threshold);

    /// EMFACS prototypes with Happiness = AU6+AU12 and threshold 0.5.
    static EmotionRuleSet emfacs_default();

    /// Rules file: JSON object with one key per emotion name mapping to a list
    /// of AU integers, plus "threshold". Neutral may be omitted.
    static EmotionRuleSet from_json_text(std::string_view text);
    static EmotionRuleSet load(const std::filesystem::path& path);
    /// "default" selects emfacs_default(), anything else is a file path.
    static EmotionRuleSet resolve(std::string_view spec);

    std::string to_json_text() const;
    void save(const std::filesystem::path& path) const;

    const AuSet& prototype(Emotion e) const noexcept { return prototypes_[emotion_id(e)]; }
    double threshold() const noexcept { return threshold_; }

private:
    std::array<AuSet, kNumEmotions> prototypes_;
    double threshold_;
};

/// AU k is active iff p[k] >= tau.
AuSet threshold_activations(std::span<const double> probabilities, const AuVocabulary& vocab, double tau);

/// full: prototype non-empty and contained in `active` (extra AUs tolerated).
/// partial: prototype intersects `active` but is not contained.
/// Neutral matches fully only the empty activation set.
MatchResult match_emotion(const AuSet& active, const EmotionRuleSet& rules, Emotion e);

/// Non-neutral emotions whose whole prototype lies inside `vocab`, by id.
std::vector<Emotion> coverage(const EmotionRuleSet& rules, const AuSet& vocab);
std::vector<Emotion> coverage(const EmotionRuleSet& rules, const AuVocabulary& vocab);

}  // namespace faukit
