// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "faukit/error.hpp"
#include "json.hpp"

namespace faukit {

using ojson = nlohmann::ordered_json;

std::string_view to_string(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::e1: return "e1";
        case ExperimentKind::e2: return "e2";
        case ExperimentKind::e3: return "e3";
    }
    return "e1";
}

ExperimentKind parse_experiment(std::string_view text) {
    if (text == "e1" || text == "E1") return ExperimentKind::e1;
    if (text == "e2" || text == "E2") return ExperimentKind::e2;
    if (text == "e3" || text == "E3") return ExperimentKind::e3;
    throw ConfigError("unknown experiment '" + std::string(text) + "' (expected e1, e2 or e3)");
}

// --- feature-level helpers ---------------------------------------------------

AuSet read_out_aus(std::span<const float> features, const DatasetManifest& layout, double tau) {
    const std::size_t k_count = layout.vocabulary.size();
    if (features.size() != layout.feature_dim())
        throw DimensionError("feature vector does not match the manifest shape");
    if (layout.kind == FeatureKind::probvec) {
        std::vector<double> p(features.begin(), features.end());
        return threshold_activations(p, layout.vocabulary, tau);
    }
    const std::size_t plane = features.size() / k_count;
    AuSet active;
    for (std::size_t k = 0; k < k_count; ++k) {
        const auto first = features.begin() + static_cast<std::ptrdiff_t>(k * plane);
        const float peak = *std::max_element(first, first + static_cast<std::ptrdiff_t>(plane));
        if (static_cast<double>(peak) >= tau) active.insert(layout.vocabulary.code_at(k));
    }
    return active;
}

std::vector<AuSet> read_out_aus(const DatasetManifest& data, double tau) {
    std::vector<AuSet> out(data.samples.size());
    const long long n = static_cast<long long>(data.samples.size());
    // Exceptions must not escape the parallel region; collect the first one.
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = read_out_aus(data.samples[static_cast<std::size_t>(i)].features, data, tau);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

void ablate_aus(DatasetManifest& data, const AuSet& aus) {
    const std::size_t plane = data.feature_dim() / data.vocabulary.size();
    for (int au : aus) {
        const std::size_t k = data.vocabulary.index_of(au);
        for (auto& s : data.samples) {
            if (s.features.size() != data.feature_dim()) throw DimensionError("sample features not loaded");
            std::fill_n(s.features.begin() + static_cast<std::ptrdiff_t>(k * plane), plane, 0.0f);
        }
    }
}

DatasetManifest perturb_features(const DatasetManifest& data, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ConfigError("noise level must be >= 0");
    DatasetManifest out = data;
    if (sigma == 0.0) return out;
    const long long n = static_cast<long long>(out.samples.size());
    const bool probs = out.kind == FeatureKind::probvec;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        Sample& s = out.samples[static_cast<std::size_t>(i)];
        std::mt19937_64 rng(mix_seed(seed, s.id));
        std::normal_distribution<double> z(0.0, 1.0);
        for (auto& v : s.features) {
            double x = static_cast<double>(v) + sigma * z(rng);
            x = probs ? std::clamp(x, 0.0, 1.0) : std::max(0.0, x);
            v = static_cast<float>(x);
        }
    }
    return out;
}

void shuffle_labels(std::array<DatasetManifest, 3>& parts, std::uint64_t seed) {
    std::vector<Emotion> labels;
    for (const auto& p : parts)
        for (const auto& s : p.samples) labels.push_back(s.emotion);
    std::mt19937_64 rng(seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    std::size_t i = 0;
    for (auto& p : parts)
        for (auto& s : p.samples) s.emotion = labels[i++];
}

EmotionRuleSet restrict_rules(const EmotionRuleSet& rules, const AuVocabulary& vocab) {
    std::array<AuSet, kNumEmotions> protos;
    for (Emotion e : kAllEmotions)
        for (int au : rules.prototype(e))
            if (vocab.contains(au)) protos[emotion_id(e)].insert(au);
    return EmotionRuleSet(std::move(protos), rules.threshold());
}

BottleneckModel make_head(HeadKind head, const DatasetManifest& layout, std::uint64_t init_seed) {
    if (head == HeadKind::heatmap5) {
        if (layout.kind != FeatureKind::heatmap)
            throw ConfigError("the heatmap5 head needs heatmap features, data is " + std::string(to_string(layout.kind)));
        return BottleneckModel::heatmap_head(init_seed, layout.shape[0], layout.shape[1], layout.shape[2]);
    }
    if (layout.kind != FeatureKind::probvec)
        throw ConfigError("the probvec1 head needs probvec features, data is " + std::string(to_string(layout.kind)));
    return BottleneckModel::probvec_head(init_seed, layout.shape[0]);
}

// --- evaluation --------------------------------------------------------------

namespace {

std::vector<Emotion> truths(const DatasetManifest& data) {
    std::vector<Emotion> out;
    for (const auto& s : data.samples) out.push_back(s.emotion);
    return out;
}

std::vector<Emotion> predicted_labels(const BottleneckModel& model, const DatasetManifest& data) {
    const LabeledMatrix m = to_matrix(data);
    if (m.cols != model.input_dim())
        throw DimensionError("data has " + std::to_string(m.cols) + " features, model expects " +
                             std::to_string(model.input_dim()));
    std::vector<Emotion> out;
    for (const auto& p : predict_batch(model, m.x, m.rows)) out.push_back(p.label);
    return out;
}

void add_au_metrics(EvaluationReport& report, const DatasetManifest& data, const std::vector<AuSet>& predicted) {
    if (!data.has_au_truth()) return;
    std::vector<AuSet> truth;
    for (const auto& s : data.samples) truth.push_back(*s.au_truth);
    report.set_au_metrics(AuBinaryCounts(data.vocabulary, truth, predicted));
}

}  // namespace

EvaluationReport evaluate(const BottleneckModel& model, const DatasetManifest& data, const EmotionRuleSet& rules) {
    if (data.samples.empty()) throw InputError("no samples to evaluate");
    EvaluationReport report;
    report.sample_count = data.samples.size();
    const auto truth = truths(data);
    const auto preds = predicted_labels(model, data);
    report.confusion = confusion_matrix(preds, truth);
    report.emotion_accuracy = emotion_accuracy(preds, truth);

    const auto aus = read_out_aus(data, rules.threshold());
    add_au_metrics(report, data, aus);
    const AuSet& happy = rules.prototype(Emotion::happiness);
    const bool covered = std::all_of(happy.begin(), happy.end(), [&](int au) { return data.vocabulary.contains(au); });
    if (covered && !happy.empty() && std::find(truth.begin(), truth.end(), Emotion::happiness) != truth.end())
        report.consistency = au_consistency(truth, aus, Emotion::happiness, happy);
    return report;
}

E1Result run_e1(const DatasetManifest& train_set, const DatasetManifest& val_set, const DatasetManifest& test_set,
                const E1Options& opts) {
    if (test_set.samples.empty()) throw InputError("test set is empty");
    BottleneckModel head = make_head(opts.head, train_set, opts.init_seed);
    E1Result result{{}, train(head, to_matrix(train_set), to_matrix(val_set), opts.train)};

    const auto truth = truths(test_set);
    const auto preds = predicted_labels(result.training.model, test_set);
    result.report.sample_count = truth.size();
    result.report.confusion = confusion_matrix(preds, truth);
    result.report.emotion_accuracy = emotion_accuracy(preds, truth);
    return result;
}

std::vector<E2Point> run_e2(const DatasetManifest& test_set, const EmotionRuleSet& rules,
                            const std::vector<double>& noise_levels, std::uint64_t seed) {
    if (!test_set.has_au_truth()) throw InputError("E2 needs au_truth on every sample");
    std::vector<E2Point> points;
    for (double sigma : noise_levels) {
        const DatasetManifest noisy = perturb_features(test_set, sigma, seed);
        E2Point p;
        p.sigma = sigma;
        p.report.sample_count = noisy.samples.size();
        add_au_metrics(p.report, noisy, read_out_aus(noisy, rules.threshold()));
        points.push_back(std::move(p));
    }
    return points;
}

E3Result run_e3(const BottleneckModel& model, const DatasetManifest& test_set, const EmotionRuleSet& rules,
                Emotion target) {
    E3Result result;
    result.target = target;
    result.target_aus = rules.prototype(target);
    if (result.target_aus.empty()) throw ConfigError("E3 target emotion has an empty prototype");
    for (int au : result.target_aus)
        if (!test_set.vocabulary.contains(au))
            throw ConfigError(std::string(to_string(target)) + " is not covered by the data vocabulary (AU" +
                              std::to_string(au) + " missing)");

    const auto truth = truths(test_set);
    const auto preds = predicted_labels(model, test_set);
    const auto aus = read_out_aus(test_set, rules.threshold());
    const EmotionRuleSet visible = restrict_rules(rules, test_set.vocabulary);

    std::size_t predicted_target = 0, full_target = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ExplainabilityRecord r;
        r.sample_id = test_set.samples[i].id;
        r.true_emotion = truth[i];
        r.predicted_emotion = preds[i];
        r.predicted_aus = aus[i];
        r.match = match_emotion(aus[i], rules, preds[i]);
        r.visible_match = match_emotion(aus[i], visible, preds[i]);
        if (preds[i] == target) {
            ++predicted_target;
            full_target += r.visible_match == MatchResult::full ? 1 : 0;
        }
        result.records.push_back(std::move(r));
    }
    if (predicted_target > 0)
        result.full_match_rate = static_cast<double>(full_target) / static_cast<double>(predicted_target);

    result.report.sample_count = truth.size();
    result.report.confusion = confusion_matrix(preds, truth);
    result.report.emotion_accuracy = emotion_accuracy(preds, truth);
    add_au_metrics(result.report, test_set, aus);
    result.report.consistency = au_consistency(truth, aus, target, result.target_aus);
    return result;
}

std::string e3_to_json_text(const E3Result& result) {
    ojson doc;
    doc["experiment"] = "e3";
    doc["target"] = to_string(result.target);
    doc["target_aus"] = std::vector<int>(result.target_aus.begin(), result.target_aus.end());
    doc["report"] = ojson::parse(report_to_json_text(result.report));
    if (result.full_match_rate) doc["full_match_rate"] = *result.full_match_rate;
    ojson records = ojson::array();
    for (const auto& r : result.records) {
        ojson j;
        j["id"] = r.sample_id;
        j["true_emotion"] = to_string(r.true_emotion);
        j["predicted_emotion"] = to_string(r.predicted_emotion);
        j["predicted_aus"] = std::vector<int>(r.predicted_aus.begin(), r.predicted_aus.end());
        j["match"] = to_string(r.match);
        j["visible_match"] = to_string(r.visible_match);
        records.push_back(std::move(j));
    }
    doc["records"] = std::move(records);
    return doc.dump(2) + "\n";
}

std::string e2_to_json_text(const std::vector<E2Point>& points) {
    ojson doc;
    doc["experiment"] = "e2";
    doc["readout"] = "frozen-features";
    ojson sweep = ojson::array();
    for (const auto& p : points) {
        ojson j;
        j["sigma"] = p.sigma;
        j["report"] = ojson::parse(report_to_json_text(p.report));
        sweep.push_back(std::move(j));
    }
    doc["sweep"] = std::move(sweep);
    return doc.dump(2) + "\n";
}

// --- orchestration -----------------------------------------------------------

std::array<DatasetManifest, 3> prepare_data(const ExperimentConfig& cfg) {
    if (!cfg.data_dir.empty()) {
        std::array<DatasetManifest, 3> parts = {load_dataset(cfg.data_dir / "train.json"),
                                                load_dataset(cfg.data_dir / "val.json"),
                                                load_dataset(cfg.data_dir / "test.json")};
        return parts;
    }
    const EmotionRuleSet rules = EmotionRuleSet::resolve(cfg.rules);
    const DatasetManifest all = generate_dataset(cfg.gen, rules, cfg.vocabulary, cfg.kind);
    return split_dataset(all, cfg.split, cfg.seed);
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

ojson history_json(const TrainResult& t) {
    ojson h = ojson::array();
    for (const auto& e : t.history) h.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_accuracy", e.val_accuracy}});
    return h;
}

}  // namespace

std::string run_experiment(const ExperimentConfig& cfg) {
    const EmotionRuleSet rules = EmotionRuleSet::resolve(cfg.rules);
    auto parts = prepare_data(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    const std::string stem = std::string(to_string(cfg.which)) + "_report";

    E1Options opts;
    opts.head = cfg.head;
    opts.train = cfg.train;
    opts.init_seed = cfg.seed;

    std::string json_text;
    std::string table;
    if (cfg.which == ExperimentKind::e1) {
        if (cfg.shuffle_labels) shuffle_labels(parts, mix_seed(cfg.seed, 0x5bd1e995));
        const E1Result r = run_e1(parts[0], parts[1], parts[2], opts);
        save_checkpoint(r.training.model, cfg.output_dir / "model.faum");
        ojson doc;
        doc["experiment"] = "e1";
        doc["head"] = to_string(cfg.head);
        doc["shuffled_labels"] = cfg.shuffle_labels;
        doc["best_epoch"] = r.training.best_epoch;
        doc["best_val_accuracy"] = r.training.best_val_accuracy;
        doc["report"] = ojson::parse(report_to_json_text(r.report));
        doc["history"] = history_json(r.training);
        json_text = doc.dump(2) + "\n";
        table = render_report(r.report);
    } else if (cfg.which == ExperimentKind::e2) {
        const auto points = run_e2(parts[2], rules, cfg.noise_levels, cfg.seed);
        json_text = e2_to_json_text(points);
        for (const auto& p : points) {
            char head[64];
            std::snprintf(head, sizeof head, "\n== noise sigma %.3f ==\n", p.sigma);
            table += head + render_report(p.report);
        }
    } else {
        BottleneckModel model = cfg.model_path.empty() ? run_e1(parts[0], parts[1], parts[2], opts).training.model
                                                       : load_checkpoint(cfg.model_path);
        if (cfg.model_path.empty()) save_checkpoint(model, cfg.output_dir / "model.faum");
        DatasetManifest test = parts[2];
        if (!cfg.ablate.empty()) ablate_aus(test, cfg.ablate);
        const E3Result r = run_e3(model, test, rules, cfg.target);
        json_text = e3_to_json_text(r);
        table = render_report(r.report);
    }
    write_text(cfg.output_dir / (stem + ".json"), json_text);
    write_text(cfg.output_dir / (stem + ".txt"), table);
    return json_text;
}

}  // namespace faukit
