// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "faukit/dataset.hpp"
#include "faukit/error.hpp"
#include "faukit/synth.hpp"

using namespace faukit;

namespace {

GenConfig centred_au6() {
    GenConfig cfg;
    cfg.au_centers[6] = {12.0, 12.0};
    return cfg;
}

// P(X outside [lo, hi]) for X ~ Binomial(n, p), summed in log space.
double binomial_tail_outside(int n, double p, int lo, int hi) {
    double inside = 0.0;
    for (int k = lo; k <= hi; ++k) {
        const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                               k * std::log(p) + (n - k) * std::log1p(-p);
        inside += std::exp(log_pmf);
    }
    return 1.0 - inside;
}

DatasetManifest numbered(std::size_t n) {
    DatasetManifest m;
    m.shape = {8};
    m.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.samples[i].id = i;
        m.samples[i].features.assign(8, 0.0f);
    }
    return m;
}

}  // namespace

TEST_CASE("Gaussian heatmap values") {
    const AuVocabulary vocab({6});
    const auto cfg = centred_au6();

    const auto empty = render_heatmap({}, AuVocabulary::heatmap10(), GenConfig{});
    CHECK(empty.values.size() == 5760);
    CHECK(std::all_of(empty.values.begin(), empty.values.end(), [](float v) { return v == 0.0f; }));

    const auto h = render_heatmap({{6, 1.0}}, vocab, cfg);
    CHECK(h.at(0, 12, 12) == 1.0f);
    // exp(-(0^2 + 2^2) / (2 * 2^2)) = exp(-1/2)
    CHECK(h.at(0, 12, 14) == doctest::Approx(0.60653).epsilon(1e-5));
    CHECK(h.at(0, 12, 14) == static_cast<float>(std::exp(-0.5)));

    const auto half = render_heatmap({{6, 0.5}}, vocab, cfg);
    CHECK(2.0f * half.at(0, 12, 12) == h.at(0, 12, 12));

    CHECK_THROWS_AS(render_heatmap({{12, 1.0}}, vocab, cfg), ConfigError);
    CHECK_THROWS_AS(render_heatmap({{6, 0.0}}, vocab, cfg), DomainError);
    GenConfig no_centre = cfg;
    no_centre.au_centers.erase(6);
    CHECK_THROWS_AS(render_heatmap({{6, 1.0}}, vocab, no_centre), ConfigError);
}

TEST_CASE("heatmap noise is clamped at zero") {
    auto cfg = centred_au6();
    cfg.noise_sigma = 0.5;
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto h = render_heatmap({{6, 0.8}}, AuVocabulary::heatmap10(), cfg, rng);
        CHECK(std::all_of(h.values.begin(), h.values.end(), [](float v) { return v >= 0.0f; }));
        CHECK(std::any_of(h.values.begin(), h.values.end(), [](float v) { return v > 0.0f; }));
    }
}

TEST_CASE("default AU centres sit in their face region") {
    for (const auto& [code, p] : default_au_centers()) {
        CHECK(p.row >= 0.0);
        CHECK(p.col < 24.0);
        if (region_of(code) == FaceRegion::upper) {
            CHECK(p.row >= 4.0);
            CHECK(p.row <= 9.0);
        } else {
            CHECK(p.row >= 14.0);
            CHECK(p.row <= 20.0);
        }
    }
    const auto scaled = scaled_au_centers(48, 48);
    CHECK(scaled.at(6).row == 2.0 * default_au_centers().at(6).row);
}

TEST_CASE("generator configuration is validated") {
    const auto rules = EmotionRuleSet::emfacs_default();
    GenConfig cfg;
    cfg.n_samples = 10;
    cfg.intensity_lo = 0.3;
    CHECK_THROWS_AS(generate_dataset(cfg, rules, AuVocabulary::disfa8(), FeatureKind::probvec), ConfigError);
    cfg = GenConfig{};
    cfg.spurious_rate = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GenConfig{};
    cfg.au_centers[6] = {30.0, 2.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GenConfig{};
    cfg.intensity_lo = 0.9;
    cfg.intensity_hi = 0.8;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("generated datasets are deterministic") {
    const auto rules = EmotionRuleSet::emfacs_default();
    GenConfig cfg;
    const auto a = generate_dataset(cfg, rules, AuVocabulary::disfa8(), FeatureKind::probvec);
    const auto b = generate_dataset(cfg, rules, AuVocabulary::disfa8(), FeatureKind::probvec);
    CHECK(manifest_to_json_text(a) == manifest_to_json_text(b));
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].features == b.samples[i].features);

    cfg.seed = 43;
    const auto c = generate_dataset(cfg, rules, AuVocabulary::disfa8(), FeatureKind::probvec);
    CHECK(manifest_to_json_text(a) != manifest_to_json_text(c));
}

TEST_CASE("class counts stay inside the binomial bound") {
    // Bound [60,140] around 700/7 = 100; the chance of any of 7 classes
    // leaving it is below 7 * P(outside).
    const double p_out = binomial_tail_outside(700, 1.0 / 7.0, 60, 140);
    CHECK(7.0 * p_out < 1e-3);

    const auto rules = EmotionRuleSet::emfacs_default();
    const auto m = generate_dataset(GenConfig{}, rules, AuVocabulary::disfa8(), FeatureKind::probvec);
    std::array<int, kNumEmotions> counts{};
    for (const auto& s : m.samples) ++counts[emotion_id(s.emotion)];
    for (int c : counts) {
        CHECK(c >= 60);
        CHECK(c <= 140);
    }
}

TEST_CASE("clean samples activate exactly the visible prototype") {
    const auto rules = EmotionRuleSet::emfacs_default();
    for (const auto& vocab : {AuVocabulary::disfa8(), AuVocabulary::heatmap10(), AuVocabulary::full_catalog()}) {
        GenConfig cfg;
        cfg.n_samples = 300;
        const auto m = generate_dataset(cfg, rules, vocab, FeatureKind::probvec);
        for (const auto& s : m.samples) {
            AuSet expected;
            for (int code : rules.prototype(s.emotion))
                if (vocab.contains(code)) expected.insert(code);
            REQUIRE(s.au_truth.has_value());
            CHECK(*s.au_truth == expected);
            const std::vector<double> p(s.features.begin(), s.features.end());
            CHECK(threshold_activations(p, vocab, rules.threshold()) == expected);
            if (s.emotion == Emotion::happiness) CHECK(*s.au_truth == AuSet{6, 12});
        }
    }
}

TEST_CASE("noisy probability vectors never cross the threshold") {
    const auto rules = EmotionRuleSet::emfacs_default();
    GenConfig cfg;
    cfg.n_samples = 300;
    cfg.noise_sigma = 0.4;
    cfg.spurious_rate = 0.2;
    const auto vocab = AuVocabulary::disfa12();
    const auto m = generate_dataset(cfg, rules, vocab, FeatureKind::probvec);
    for (const auto& s : m.samples) {
        const std::vector<double> p(s.features.begin(), s.features.end());
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(threshold_activations(p, vocab, rules.threshold()) == *s.au_truth);
    }
}

TEST_CASE("heatmap samples carry the configured shape") {
    const auto rules = EmotionRuleSet::emfacs_default();
    GenConfig cfg;
    cfg.n_samples = 20;
    const auto m = generate_dataset(cfg, rules, AuVocabulary::heatmap10(), FeatureKind::heatmap);
    CHECK(m.shape == std::vector<std::uint32_t>{10, 24, 24});
    CHECK(m.feature_dim() == 5760);
    for (const auto& s : m.samples) CHECK(s.features.size() == 5760);
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("partition sizes use largest-remainder rounding") {
    CHECK(partition_sizes(100, {0.7, 0.15, 0.15}) == std::array<std::size_t, 3>{70, 15, 15});
    // 10 * (0.5, 0.25, 0.25) = 5, 2.5, 2.5: one leftover unit, tied
    // fractions, the earlier partition wins.
    CHECK(partition_sizes(10, {0.5, 0.25, 0.25}) == std::array<std::size_t, 3>{5, 3, 2});
    CHECK(partition_sizes(700, {0.7, 0.15, 0.15}) == std::array<std::size_t, 3>{490, 105, 105});
    CHECK(partition_sizes(3, {0.7, 0.15, 0.15}) == std::array<std::size_t, 3>{2, 1, 0});
    CHECK_THROWS_AS(partition_sizes(2, {0.7, 0.15, 0.15}), SizeError);
    CHECK_THROWS_AS(partition_sizes(10, {0.7, 0.2, 0.2}), ConfigError);
    CHECK_THROWS_AS(partition_sizes(10, {1.0, 0.0, 0.0}), ConfigError);
}

TEST_CASE("splits partition the sample ids") {
    for (std::size_t n : {3u, 10u, 57u, 100u}) {
        const auto m = numbered(n);
        for (std::uint64_t seed : {1u, 2u, 42u}) {
            const auto parts = split_dataset(m, {0.7, 0.15, 0.15}, seed);
            std::vector<std::uint64_t> ids;
            for (std::size_t p = 0; p < 3; ++p) {
                CHECK(parts[p].samples.size() == partition_sizes(n, {0.7, 0.15, 0.15})[p]);
                CHECK(std::is_sorted(parts[p].samples.begin(), parts[p].samples.end(),
                                     [](const Sample& a, const Sample& b) { return a.id < b.id; }));
                for (const auto& s : parts[p].samples) ids.push_back(s.id);
            }
            std::sort(ids.begin(), ids.end());
            std::vector<std::uint64_t> expected(n);
            std::iota(expected.begin(), expected.end(), 0);
            CHECK(ids == expected);

            const auto again = split_dataset(m, {0.7, 0.15, 0.15}, seed);
            for (std::size_t p = 0; p < 3; ++p)
                CHECK(manifest_to_json_text(again[p]) == manifest_to_json_text(parts[p]));
        }
    }
}

TEST_CASE("manifests round-trip through JSON and feature files") {
    const auto rules = EmotionRuleSet::emfacs_default();
    GenConfig cfg;
    cfg.n_samples = 12;
    auto m = generate_dataset(cfg, rules, AuVocabulary::heatmap10(), FeatureKind::heatmap);
    const auto dir = std::filesystem::temp_directory_path() / "faukit_test_manifest";
    std::filesystem::remove_all(dir);
    write_features(m, dir);
    save_manifest(m, dir / "manifest.json");

    const auto back = load_dataset(dir / "manifest.json");
    REQUIRE(back.samples.size() == m.samples.size());
    CHECK(back.vocabulary == m.vocabulary);
    CHECK(back.shape == m.shape);
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
        CHECK(back.samples[i].features == m.samples[i].features);
        CHECK(back.samples[i].emotion == m.samples[i].emotion);
        CHECK(back.samples[i].au_truth == m.samples[i].au_truth);
    }
    CHECK(manifest_to_json_text(back) == manifest_to_json_text(m));

    const auto mat = to_matrix(back);
    CHECK(mat.rows == 12);
    CHECK(mat.cols == 5760);
    std::filesystem::remove_all(dir);

    CHECK_THROWS_AS(manifest_from_json_text("{}", "."), FormatError);
    CHECK_THROWS_AS(load_manifest("/nonexistent/manifest.json"), InputError);
}
