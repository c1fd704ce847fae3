// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "doctest.h"
#include "faukit/error.hpp"
#include "faukit/facs.hpp"

using namespace faukit;

namespace {

// Exhaustive oracle: an emotion is covered iff some subset of the vocabulary
// equals its prototype.
std::vector<Emotion> coverage_by_subsets(const EmotionRuleSet& rules, const std::vector<int>& vocab) {
    std::vector<Emotion> out;
    for (Emotion e : kAllEmotions) {
        if (e == Emotion::neutral || rules.prototype(e).empty()) continue;
        bool found = false;
        for (unsigned mask = 0; mask < (1u << vocab.size()) && !found; ++mask) {
            AuSet subset;
            for (std::size_t i = 0; i < vocab.size(); ++i)
                if (mask & (1u << i)) subset.insert(vocab[i]);
            found = subset == rules.prototype(e);
        }
        if (found) out.push_back(e);
    }
    return out;
}

std::vector<int> random_vocab(std::mt19937_64& rng, std::size_t max_size) {
    std::vector<int> all;
    for (const auto& au : au_catalog()) all.push_back(au.code);
    std::shuffle(all.begin(), all.end(), rng);
    std::uniform_int_distribution<std::size_t> n(1, max_size);
    all.resize(n(rng));
    return all;
}

}  // namespace

TEST_CASE("catalog regions follow the upper/lower face split") {
    for (const auto& au : au_catalog()) CHECK((au.region == FaceRegion::upper) == (au.code <= 7));
    CHECK(region_of(6) == FaceRegion::upper);
    CHECK(region_of(12) == FaceRegion::lower);
    CHECK_THROWS_AS(region_of(3), ConfigError);

    // The 12 DISFA AUs split 5 upper / 7 lower.
    const auto disfa = AuVocabulary::disfa12();
    const auto upper = std::count_if(disfa.codes().begin(), disfa.codes().end(),
                                     [](int c) { return region_of(c) == FaceRegion::upper; });
    CHECK(upper == 5);
    CHECK(disfa.size() - upper == 7);
}

TEST_CASE("vocabulary index is a bijection and rejects bad input") {
    const auto v = AuVocabulary::disfa8();
    REQUIRE(v.size() == 8);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(v.index_of(v.code_at(k)) == k);
    CHECK_THROWS_AS(AuVocabulary({}), ConfigError);
    CHECK_THROWS_AS(AuVocabulary({6, 6}), ConfigError);
    CHECK_THROWS_AS(AuVocabulary({6, 99}), ConfigError);
    CHECK_THROWS_AS(v.index_of(5), ConfigError);
    CHECK(AuVocabulary::parse("AU6, AU12").codes().size() == 2);
    CHECK(AuVocabulary::parse("disfa8") == v);
    CHECK_THROWS_AS(AuVocabulary::parse("6,x"), ConfigError);
}

TEST_CASE("emotion ids are fixed") {
    CHECK(kAllEmotions.size() == 7);
    CHECK(emotion_id(Emotion::anger) == 0);
    CHECK(emotion_id(Emotion::happiness) == 3);
    CHECK(emotion_id(Emotion::neutral) == 6);
    CHECK(parse_emotion("happiness") == Emotion::happiness);
    CHECK(to_string(Emotion::surprise) == "Surprise");
    CHECK_THROWS_AS(emotion_from_id(7), DomainError);
    CHECK_THROWS_AS(parse_emotion("Contempt"), ConfigError);
}

TEST_CASE("rule set construction validates prototypes and threshold") {
    const auto rules = EmotionRuleSet::emfacs_default();
    CHECK(rules.prototype(Emotion::happiness) == AuSet{6, 12});
    CHECK(rules.prototype(Emotion::neutral).empty());
    CHECK(rules.threshold() == 0.5);

    std::array<AuSet, kNumEmotions> p{};
    CHECK_THROWS_AS(EmotionRuleSet(p, 0.0), ConfigError);
    CHECK_THROWS_AS(EmotionRuleSet(p, 1.0), ConfigError);
    p[emotion_id(Emotion::neutral)] = {6};
    CHECK_THROWS_AS(EmotionRuleSet(p, 0.5), ConfigError);
    p[emotion_id(Emotion::neutral)] = {};
    p[emotion_id(Emotion::anger)] = {3};
    CHECK_THROWS_AS(EmotionRuleSet(p, 0.5), ConfigError);
}

TEST_CASE("rules file round-trips and rejects unknown keys") {
    const auto rules = EmotionRuleSet::emfacs_default();
    const auto again = EmotionRuleSet::from_json_text(rules.to_json_text());
    for (Emotion e : kAllEmotions) CHECK(again.prototype(e) == rules.prototype(e));
    CHECK(again.threshold() == rules.threshold());

    const auto shipped = EmotionRuleSet::load(FAUKIT_SOURCE_DIR "/data/rules/emfacs_default.json");
    for (Emotion e : kAllEmotions) CHECK(shipped.prototype(e) == rules.prototype(e));

    CHECK_THROWS_WITH_AS(EmotionRuleSet::from_json_text(R"({"Happiness":[6,12],"Joy":[6]})"),
                         doctest::Contains("Joy"), ConfigError);
    CHECK_THROWS_AS(EmotionRuleSet::from_json_text(R"({"Happiness":[6,12]})"), ConfigError);
    CHECK_THROWS_AS(EmotionRuleSet::from_json_text("not json"), FormatError);
    CHECK_THROWS_AS(EmotionRuleSet::load("/nonexistent/rules.json"), InputError);
}

TEST_CASE("threshold_activations") {
    const AuVocabulary pair({6, 12});
    const std::vector<double> p{0.7, 0.3};
    CHECK(threshold_activations(p, pair, 0.5) == AuSet{6});

    const auto d8 = AuVocabulary::disfa8();
    const std::vector<double> zeros(8, 0.0);
    CHECK(threshold_activations(zeros, d8, 0.01).empty());

    const AuVocabulary one({6});
    const std::vector<double> half{0.5};
    CHECK(threshold_activations(half, one, 0.5) == AuSet{6});

    CHECK_THROWS_AS(threshold_activations(p, one, 0.5), DimensionError);
    const std::vector<double> bad{1.2, 0.0};
    CHECK_THROWS_AS(threshold_activations(bad, pair, 0.5), DomainError);
    CHECK_THROWS_AS(threshold_activations(p, pair, 1.0), DomainError);
}

TEST_CASE("threshold monotonicity property") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto vocab = AuVocabulary::full_catalog();
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> p(vocab.size());
        for (auto& v : p) v = u(rng);
        double t1 = 0.01 + 0.98 * u(rng), t2 = 0.01 + 0.98 * u(rng);
        if (t1 > t2) std::swap(t1, t2);
        const AuSet lo = threshold_activations(p, vocab, t1);
        const AuSet hi = threshold_activations(p, vocab, t2);
        CHECK(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()));
    }
}

TEST_CASE("match_emotion") {
    const auto rules = EmotionRuleSet::emfacs_default();
    CHECK(match_emotion({6, 12}, rules, Emotion::happiness) == MatchResult::full);
    CHECK(match_emotion({12}, rules, Emotion::happiness) == MatchResult::partial);
    CHECK(match_emotion({1, 2}, rules, Emotion::happiness) == MatchResult::none);
    CHECK(match_emotion({}, rules, Emotion::neutral) == MatchResult::full);
    CHECK(match_emotion({6}, rules, Emotion::neutral) == MatchResult::none);
    // Extra activations do not break a full match.
    CHECK(match_emotion({1, 6, 12, 25}, rules, Emotion::happiness) == MatchResult::full);
}

TEST_CASE("full matches survive supersets") {
    const auto rules = EmotionRuleSet::emfacs_default();
    std::mt19937_64 rng(5);
    const auto all = AuVocabulary::full_catalog();
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 300; ++trial) {
        AuSet a;
        for (int c : all.codes())
            if (coin(rng)) a.insert(c);
        for (Emotion e : kAllEmotions) {
            if (match_emotion(a, rules, e) != MatchResult::full || e == Emotion::neutral) continue;
            AuSet bigger = a;
            for (int c : all.codes())
                if (coin(rng)) bigger.insert(c);
            CHECK(match_emotion(bigger, rules, e) == MatchResult::full);
        }
    }
}

TEST_CASE("coverage of the DISFA-8 vocabulary is Happiness only") {
    const auto rules = EmotionRuleSet::emfacs_default();
    CHECK(coverage(rules, AuVocabulary::disfa8()) == std::vector<Emotion>{Emotion::happiness});
    const auto everything = coverage(rules, AuVocabulary::full_catalog());
    CHECK(everything.size() == 6);
    CHECK(std::find(everything.begin(), everything.end(), Emotion::neutral) == everything.end());
    CHECK(coverage(rules, AuSet{}).empty());
}

TEST_CASE("coverage agrees with exhaustive subset search and is monotone") {
    const auto rules = EmotionRuleSet::emfacs_default();
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto v = random_vocab(rng, 8);
        CHECK(coverage(rules, AuSet(v.begin(), v.end())) == coverage_by_subsets(rules, v));

        auto bigger = v;
        for (int extra : random_vocab(rng, 6))
            if (std::find(bigger.begin(), bigger.end(), extra) == bigger.end()) bigger.push_back(extra);
        const auto small_cov = coverage(rules, AuSet(v.begin(), v.end()));
        const auto big_cov = coverage(rules, AuSet(bigger.begin(), bigger.end()));
        CHECK(std::includes(big_cov.begin(), big_cov.end(), small_cov.begin(), small_cov.end()));
    }
}
