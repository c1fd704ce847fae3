// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/facs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "faukit/error.hpp"
#include "json.hpp"

namespace faukit {

namespace {

constexpr FaceRegion region_for_code(int code) { return code <= 7 ? FaceRegion::upper : FaceRegion::lower; }

constexpr std::array<AuCode, 17> kCatalog = {{
    {1, region_for_code(1), "Inner Brow Raiser"},
    {2, region_for_code(2), "Outer Brow Raiser"},
    {4, region_for_code(4), "Brow Lowerer"},
    {5, region_for_code(5), "Upper Lid Raiser"},
    {6, region_for_code(6), "Cheek Raiser"},
    {7, region_for_code(7), "Lid Tightener"},
    {9, region_for_code(9), "Nose Wrinkler"},
    {10, region_for_code(10), "Upper Lip Raiser"},
    {12, region_for_code(12), "Lip Corner Puller"},
    {14, region_for_code(14), "Dimpler"},
    {15, region_for_code(15), "Lip Corner Depressor"},
    {17, region_for_code(17), "Chin Raiser"},
    {20, region_for_code(20), "Lip Stretcher"},
    {23, region_for_code(23), "Lip Tightener"},
    {24, region_for_code(24), "Lip Pressor"},
    {25, region_for_code(25), "Lips Part"},
    {26, region_for_code(26), "Jaw Drop"},
}};

constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "Anger", "Disgust", "Fear", "Happiness", "Sadness", "Surprise", "Neutral",
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::span<const AuCode> au_catalog() { return kCatalog; }

const AuCode* find_au(int code) noexcept {
    auto it = std::lower_bound(kCatalog.begin(), kCatalog.end(), code,
                               [](const AuCode& a, int c) { return a.code < c; });
    return (it != kCatalog.end() && it->code == code) ? &*it : nullptr;
}

FaceRegion region_of(int code) {
    const AuCode* au = find_au(code);
    if (!au) throw ConfigError("AU" + std::to_string(code) + " is not in the AU catalog");
    return au->region;
}

std::string format_au_set(const AuSet& aus) {
    std::string out = "{";
    bool first = true;
    for (int c : aus) {
        if (!first) out += ",";
        out += "AU" + std::to_string(c);
        first = false;
    }
    return out + "}";
}

// --- AuVocabulary ------------------------------------------------------------

AuVocabulary::AuVocabulary(std::vector<int> codes) : codes_(std::move(codes)) {
    if (codes_.empty()) throw ConfigError("AU vocabulary must contain at least one AU");
    for (std::size_t i = 0; i < codes_.size(); ++i) {
        if (!find_au(codes_[i]))
            throw ConfigError("AU" + std::to_string(codes_[i]) + " is not in the AU catalog");
        if (!index_.emplace(codes_[i], i).second)
            throw ConfigError("duplicate AU" + std::to_string(codes_[i]) + " in vocabulary");
    }
}

AuVocabulary AuVocabulary::disfa8() { return AuVocabulary({1, 2, 4, 6, 9, 12, 25, 26}); }
AuVocabulary AuVocabulary::disfa12() { return AuVocabulary({1, 2, 4, 5, 6, 9, 12, 15, 17, 20, 25, 26}); }
AuVocabulary AuVocabulary::bp4d12() { return AuVocabulary({1, 2, 4, 6, 7, 10, 12, 14, 15, 17, 23, 24}); }
AuVocabulary AuVocabulary::heatmap10() { return AuVocabulary({1, 2, 4, 6, 7, 10, 12, 14, 15, 17}); }

AuVocabulary AuVocabulary::full_catalog() {
    std::vector<int> codes;
    for (const auto& au : kCatalog) codes.push_back(au.code);
    return AuVocabulary(std::move(codes));
}

AuVocabulary AuVocabulary::parse(std::string_view text) {
    const std::string key = lower(trim(text));
    if (key == "disfa8") return disfa8();
    if (key == "disfa12") return disfa12();
    if (key == "bp4d12") return bp4d12();
    if (key == "heatmap10") return heatmap10();
    if (key == "all" || key == "catalog") return full_catalog();

    std::vector<int> codes;
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.rfind("au", 0) == 0) item = item.substr(2);
        std::size_t used = 0;
        int code = 0;
        try {
            code = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse AU vocabulary '" + std::string(text) + "'");
        }
        if (used != item.size()) throw ConfigError("cannot parse AU vocabulary '" + std::string(text) + "'");
        codes.push_back(code);
    }
    return AuVocabulary(std::move(codes));
}

std::size_t AuVocabulary::index_of(int code) const {
    auto it = index_.find(code);
    if (it == index_.end()) throw ConfigError("AU" + std::to_string(code) + " is not in the vocabulary");
    return it->second;
}

// --- Emotion -----------------------------------------------------------------

Emotion emotion_from_id(std::size_t id) {
    if (id >= kNumEmotions) throw DomainError("emotion id " + std::to_string(id) + " out of range 0..6");
    return static_cast<Emotion>(id);
}

std::string_view to_string(Emotion e) noexcept { return kEmotionNames[emotion_id(e)]; }

Emotion parse_emotion(std::string_view name) {
    const std::string key = lower(trim(name));
    for (std::size_t i = 0; i < kNumEmotions; ++i)
        if (lower(kEmotionNames[i]) == key) return static_cast<Emotion>(i);
    throw ConfigError("unknown emotion '" + std::string(name) + "'");
}

std::string_view to_string(MatchResult m) noexcept {
    switch (m) {
        case MatchResult::full: return "full";
        case MatchResult::partial: return "partial";
        case MatchResult::none: return "none";
    }
    return "none";
}

// --- EmotionRuleSet ----------------------------------------------------------

EmotionRuleSet::EmotionRuleSet(std::array<AuSet, kNumEmotions> prototypes, double threshold)
    : prototypes_(std::move(prototypes)), threshold_(threshold) {
    if (!(threshold_ > 0.0 && threshold_ < 1.0))
        throw ConfigError("rule threshold must lie in (0,1), got " + std::to_string(threshold_));
    if (!prototype(Emotion::neutral).empty()) throw ConfigError("Neutral prototype must be empty");
    for (Emotion e : kAllEmotions)
        for (int code : prototype(e))
            if (!find_au(code))
                throw ConfigError(std::string(to_string(e)) + " prototype references AU" + std::to_string(code) +
                                  " which is not in the AU catalog");
}

EmotionRuleSet EmotionRuleSet::emfacs_default() {
    std::array<AuSet, kNumEmotions> p;
    p[emotion_id(Emotion::anger)] = {4, 5, 7, 23};
    p[emotion_id(Emotion::disgust)] = {9, 15};
    p[emotion_id(Emotion::fear)] = {1, 2, 4, 5, 7, 20, 26};
    p[emotion_id(Emotion::happiness)] = {6, 12};
    p[emotion_id(Emotion::sadness)] = {1, 4, 15};
    p[emotion_id(Emotion::surprise)] = {1, 2, 5, 26};
    return EmotionRuleSet(std::move(p), 0.5);
}

EmotionRuleSet EmotionRuleSet::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("rules file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("rules file must be a JSON object");

    std::array<AuSet, kNumEmotions> prototypes;
    std::array<bool, kNumEmotions> seen{};
    double threshold = 0.5;
    for (const auto& [key, value] : doc.items()) {
        if (key == "threshold") {
            if (!value.is_number()) throw FormatError("rules 'threshold' must be a number");
            threshold = value.get<double>();
            continue;
        }
        Emotion e;
        try {
            e = parse_emotion(key);
        } catch (const ConfigError&) {
            throw ConfigError("unknown key '" + key + "' in rules file");
        }
        if (!value.is_array()) throw FormatError("rules entry '" + key + "' must be a list of AU integers");
        for (const auto& au : value) {
            if (!au.is_number_integer()) throw FormatError("rules entry '" + key + "' must be a list of AU integers");
            prototypes[emotion_id(e)].insert(au.get<int>());
        }
        seen[emotion_id(e)] = true;
    }
    for (Emotion e : kAllEmotions)
        if (e != Emotion::neutral && !seen[emotion_id(e)])
            throw ConfigError("rules file has no entry for " + std::string(to_string(e)));
    return EmotionRuleSet(std::move(prototypes), threshold);
}

EmotionRuleSet EmotionRuleSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open rules file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

EmotionRuleSet EmotionRuleSet::resolve(std::string_view spec) {
    if (spec.empty() || spec == "default") return emfacs_default();
    return load(std::filesystem::path(spec));
}

std::string EmotionRuleSet::to_json_text() const {
    nlohmann::ordered_json doc;
    for (Emotion e : kAllEmotions) {
        const AuSet& p = prototype(e);
        doc[std::string(to_string(e))] = std::vector<int>(p.begin(), p.end());
    }
    doc["threshold"] = threshold_;
    return doc.dump(2) + "\n";
}

void EmotionRuleSet::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write rules file " + path.string());
    out << to_json_text();
}

// --- operations --------------------------------------------------------------

AuSet threshold_activations(std::span<const double> probabilities, const AuVocabulary& vocab, double tau) {
    if (probabilities.size() != vocab.size())
        throw DimensionError("probability vector has " + std::to_string(probabilities.size()) +
                             " entries, vocabulary has " + std::to_string(vocab.size()));
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("threshold must lie in (0,1)");
    AuSet active;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        const double p = probabilities[k];
        if (!(p >= 0.0 && p <= 1.0))
            throw DomainError("probability for AU" + std::to_string(vocab.code_at(k)) + " outside [0,1]");
        if (p >= tau) active.insert(vocab.code_at(k));
    }
    return active;
}

MatchResult match_emotion(const AuSet& active, const EmotionRuleSet& rules, Emotion e) {
    const AuSet& proto = rules.prototype(e);
    if (proto.empty()) return active.empty() ? MatchResult::full : MatchResult::none;
    std::size_t hits = 0;
    for (int code : proto) hits += active.contains(code) ? 1 : 0;
    if (hits == proto.size()) return MatchResult::full;
    return hits > 0 ? MatchResult::partial : MatchResult::none;
}

std::vector<Emotion> coverage(const EmotionRuleSet& rules, const AuSet& vocab) {
    std::vector<Emotion> covered;
    for (Emotion e : kAllEmotions) {
        if (e == Emotion::neutral) continue;
        const AuSet& proto = rules.prototype(e);
        if (!proto.empty() && std::includes(vocab.begin(), vocab.end(), proto.begin(), proto.end()))
            covered.push_back(e);
    }
    return covered;
}

std::vector<Emotion> coverage(const EmotionRuleSet& rules, const AuVocabulary& vocab) {
    return coverage(rules, vocab.as_set());
}

}  // namespace faukit
