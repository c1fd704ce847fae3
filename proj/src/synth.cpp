// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/synth.hpp"

#include <algorithm>
#include <cmath>

#include "faukit/error.hpp"

namespace faukit {

FeatureTensor HeatmapStack::to_tensor() const {
    return FeatureTensor{{static_cast<std::uint32_t>(channels), static_cast<std::uint32_t>(height),
                          static_cast<std::uint32_t>(width)},
                         values};
}

HeatmapStack HeatmapStack::from_tensor(const FeatureTensor& t) {
    if (t.dims.size() != 3) throw DimensionError("heatmap stack needs a 3-D tensor");
    HeatmapStack h(t.dims[0], t.dims[1], t.dims[2]);
    h.values = t.values;
    return h;
}

std::map<int, GridPoint> default_au_centers() {
    return {
        {1, {4, 10}},   {2, {4, 4}},   {4, {5, 12}},  {5, {7, 6}},   {6, {9, 5}},   {7, {8, 9}},
        {9, {14, 12}},  {10, {15, 9}}, {12, {17, 6}}, {14, {17, 4}}, {15, {19, 7}}, {17, {20, 12}},
        {20, {18, 3}},  {23, {17, 12}}, {24, {18, 12}}, {25, {18, 10}}, {26, {20, 9}},
    };
}

std::map<int, GridPoint> scaled_au_centers(std::size_t height, std::size_t width) {
    auto centers = default_au_centers();
    for (auto& [code, p] : centers) {
        p.row = std::min(std::round(p.row * static_cast<double>(height) / 24.0), static_cast<double>(height - 1));
        p.col = std::min(std::round(p.col * static_cast<double>(width) / 24.0), static_cast<double>(width - 1));
    }
    return centers;
}

void GenConfig::validate() const {
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    if (!(spurious_rate >= 0.0 && spurious_rate <= 1.0)) throw ConfigError("spurious rate must lie in [0,1]");
    if (!(intensity_lo > 0.0 && intensity_lo <= intensity_hi && intensity_hi <= 1.0))
        throw ConfigError("intensity range must satisfy 0 < lo <= hi <= 1");
    if (!(gaussian_sigma > 0.0)) throw ConfigError("gaussian sigma must be > 0");
    if (grid_height == 0 || grid_width == 0) throw ConfigError("grid dimensions must be positive");
    for (const auto& [code, p] : au_centers) {
        if (!(p.row >= 0.0 && p.row <= static_cast<double>(grid_height - 1) && p.col >= 0.0 &&
              p.col <= static_cast<double>(grid_width - 1)))
            throw ConfigError("centre of AU" + std::to_string(code) + " lies outside the grid");
    }
}

namespace {

HeatmapStack render_impl(const std::map<int, double>& active, const AuVocabulary& vocab, const GenConfig& cfg,
                         std::mt19937_64* rng) {
    HeatmapStack stack(vocab.size(), cfg.grid_height, cfg.grid_width);
    const double inv_two_var = 1.0 / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma);

    for (const auto& [code, intensity] : active) {
        if (!vocab.contains(code)) throw ConfigError("AU" + std::to_string(code) + " is not in the vocabulary");
        if (!(intensity > 0.0 && intensity <= 1.0))
            throw DomainError("intensity of AU" + std::to_string(code) + " must lie in (0,1]");
        auto it = cfg.au_centers.find(code);
        if (it == cfg.au_centers.end()) throw ConfigError("no heatmap centre configured for AU" + std::to_string(code));
        const GridPoint c = it->second;
        const std::size_t k = vocab.index_of(code);
        for (std::size_t r = 0; r < cfg.grid_height; ++r) {
            const double dr = static_cast<double>(r) - c.row;
            for (std::size_t col = 0; col < cfg.grid_width; ++col) {
                const double dc = static_cast<double>(col) - c.col;
                stack.at(k, r, col) = static_cast<float>(intensity * std::exp(-(dr * dr + dc * dc) * inv_two_var));
            }
        }
    }

    if (rng && cfg.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
        for (auto& v : stack.values) v = static_cast<float>(std::max(0.0, static_cast<double>(v) + noise(*rng)));
    }
    return stack;
}

// Largest float strictly below tau, and smallest float at or above it, so
// that stored f32 probabilities keep their side of the threshold.
float float_below(double tau) {
    float f = static_cast<float>(tau);
    while (static_cast<double>(f) >= tau) f = std::nextafter(f, 0.0f);
    return f;
}

float float_at_or_above(double tau) {
    float f = static_cast<float>(tau);
    while (static_cast<double>(f) < tau) f = std::nextafter(f, 2.0f);
    return f;
}

}  // namespace

HeatmapStack render_heatmap(const std::map<int, double>& active, const AuVocabulary& vocab, const GenConfig& cfg,
                            std::mt19937_64& rng) {
    return render_impl(active, vocab, cfg, &rng);
}

HeatmapStack render_heatmap(const std::map<int, double>& active, const AuVocabulary& vocab, const GenConfig& cfg) {
    return render_impl(active, vocab, cfg, nullptr);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

DatasetManifest generate_dataset(const GenConfig& cfg, const EmotionRuleSet& rules, const AuVocabulary& vocab,
                                 FeatureKind kind) {
    cfg.validate();
    if (vocab.size() == 0) throw ConfigError("cannot generate data over an empty vocabulary");
    const double tau = rules.threshold();
    if (cfg.intensity_lo < tau)
        throw ConfigError("intensity range starts below the rule threshold; active AUs would read as inactive");
    if (kind == FeatureKind::heatmap)
        for (int code : vocab.codes())
            if (!cfg.au_centers.contains(code))
                throw ConfigError("no heatmap centre configured for AU" + std::to_string(code));

    DatasetManifest m;
    m.kind = kind;
    m.vocabulary = vocab;
    if (kind == FeatureKind::heatmap)
        m.shape = {static_cast<std::uint32_t>(vocab.size()), static_cast<std::uint32_t>(cfg.grid_height),
                   static_cast<std::uint32_t>(cfg.grid_width)};
    else
        m.shape = {static_cast<std::uint32_t>(vocab.size())};
    m.samples.resize(cfg.n_samples);

    const float inactive_cap = float_below(tau);
    const float active_floor = float_at_or_above(tau);
    const long long n = static_cast<long long>(cfg.n_samples);

#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        std::uniform_int_distribution<int> pick_label(0, static_cast<int>(kNumEmotions) - 1);
        std::uniform_real_distribution<double> pick_intensity(cfg.intensity_lo, cfg.intensity_hi);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        Sample& s = m.samples[static_cast<std::size_t>(i)];
        s.id = static_cast<std::uint64_t>(i);
        s.emotion = emotion_from_id(static_cast<std::size_t>(pick_label(rng)));
        const AuSet& proto = rules.prototype(s.emotion);

        std::map<int, double> active;
        for (int code : vocab.codes()) {
            const double intensity = pick_intensity(rng);
            const bool spurious = unit(rng) < cfg.spurious_rate;
            if (proto.contains(code) || spurious) active.emplace(code, intensity);
        }
        AuSet truth;
        for (const auto& kv : active) truth.insert(kv.first);
        s.au_truth = std::move(truth);

        if (kind == FeatureKind::heatmap) {
            s.features = render_heatmap(active, vocab, cfg, rng).values;
        } else {
            s.features.resize(vocab.size());
            std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);
            for (std::size_t k = 0; k < vocab.size(); ++k) {
                auto it = active.find(vocab.code_at(k));
                const double jitter = cfg.noise_sigma > 0.0 ? noise(rng) : 0.0;
                if (it != active.end()) {
                    const float v = static_cast<float>(std::min(1.0, it->second + jitter));
                    s.features[k] = std::max(v, active_floor);
                } else {
                    s.features[k] = std::min(static_cast<float>(std::abs(jitter)), inactive_cap);
                }
            }
        }
    }
    return m;
}

}  // namespace faukit
