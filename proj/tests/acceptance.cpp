// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one [PASS]/[FAIL] line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "faukit/experiments.hpp"
#include "support.hpp"

using namespace faukit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("[%s] %s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::array<DatasetManifest, 3> clean(FeatureKind kind, const AuVocabulary& vocab) {
    GenConfig cfg;
    cfg.n_samples = 700;
    cfg.seed = 42;
    return split_dataset(generate_dataset(cfg, EmotionRuleSet::emfacs_default(), vocab, kind), {}, 42);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<AuSet> decode_sets(unsigned mask) {
    std::vector<AuSet> sets(3);
    const int aus[2] = {6, 12};
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            if (mask & (1u << (2 * s + a))) sets[s].insert(aus[a]);
    return sets;
}

Outcome ac1() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> d(0.0, 1.0);
    double worst = 0.0;
    std::size_t entries = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = faukit::testing::random_net(rng, 10, 2);
        std::vector<double> x(m.input_dim());
        for (auto& v : x) v = d(rng);
        const auto g = faukit::testing::gradient_check(m, x, emotion_from_id(rng() % 7));
        worst = std::max(worst, g.max_rel_error);
        entries += g.entries;
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-5 && secs < 30.0,
            fmt("100 nets, %zu parameters, max relative error %.3g (limit 1e-5), %.2f s (limit 30 s)", entries, worst,
                secs)};
}

Outcome ac2() {
    const auto heat = BottleneckModel::heatmap_head(1);
    const auto specs = heat.specs();
    const std::size_t dims[] = {5760, 2048, 1024, 512, 256, 7};
    bool ok = specs.size() == 5;
    for (std::size_t i = 0; ok && i < 5; ++i)
        ok = specs[i].in_dim == dims[i] && specs[i].out_dim == dims[i + 1] &&
             specs[i].activation == (i < 4 ? Activation::relu : Activation::none);
    const bool flat = flatten(HeatmapStack(10, 24, 24)).size() == 5760;
    const auto pv = BottleneckModel::probvec_head(1, 8);
    const bool single = pv.layer_count() == 1 && pv.specs()[0].in_dim == 8 && pv.specs()[0].out_dim == 7;
    const bool saved = decode_checkpoint(encode_checkpoint(heat)).layer_count() == 5;
    return {ok && flat && single && saved,
            fmt("heatmap head 5760-2048-1024-512-256-7 %s, flatten(10x24x24)=5760 %s, probvec head 1 layer %s, "
                "checkpoint records 5 layers %s",
                ok ? "yes" : "no", flat ? "yes" : "no", single ? "yes" : "no", saved ? "yes" : "no")};
}

Outcome ac3() {
    const auto t0 = Clock::now();
    const auto cov = coverage(EmotionRuleSet::emfacs_default(), AuVocabulary::disfa8());
    const double secs = seconds_since(t0);
    std::string names;
    for (auto e : cov) names += std::string(names.empty() ? "" : ",") + std::string(to_string(e));
    return {cov == std::vector<Emotion>{Emotion::happiness} && secs < 1.0,
            fmt("coverage(EMFACS, DISFA-8) = {%s}, %.4f s (limit 1 s)", names.c_str(), secs)};
}

Outcome ac4() {
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = true;

    const auto pv = clean(FeatureKind::probvec, AuVocabulary::disfa8());
    E1Options po;
    po.head = HeadKind::probvec1;
    po.init_seed = 42;
    po.train.seed = 42;
    po.train.epochs = 100;
    po.train.learning_rate = 0.05;
    const auto pr = run_e1(pv[0], pv[1], pv[2], po);
    const double pacc = *pr.report.emotion_accuracy;
    ok = ok && pacc == 1.0 && pr.training.history.size() <= 100;
    detail += fmt("probvec head test acc %.4f (need 1.00, %zu epochs); ", pacc, pr.training.history.size());

    const auto hm = clean(FeatureKind::heatmap, AuVocabulary::heatmap10());
    E1Options ho;
    ho.head = HeadKind::heatmap5;
    ho.init_seed = 42;
    ho.train.seed = 42;
    ho.train.epochs = 100;
    const auto th = Clock::now();
    const auto hr = run_e1(hm[0], hm[1], hm[2], ho);
    const double hacc = *hr.report.emotion_accuracy;
    ok = ok && hacc >= 0.95 && hr.training.history.size() <= 100;
    detail += fmt("heatmap head test acc %.4f (need >= 0.95, %zu epochs, %.1f s); ", hacc,
                  hr.training.history.size(), seconds_since(th));

    auto shuffled = pv;
    shuffle_labels(shuffled, mix_seed(42, 0x5bd1e995));
    const auto sr = run_e1(shuffled[0], shuffled[1], shuffled[2], po);
    const std::size_t n = shuffled[2].samples.size();
    const auto ci = faukit::testing::binomial_interval(n, 1.0 / 7.0, 0.01);
    const auto correct = sr.report.confusion->trace();
    const bool chance = correct >= ci.lo && correct <= ci.hi;
    ok = ok && chance;
    detail += fmt("shuffled-label acc %.4f (%llu/%zu, 99%% binomial interval [%zu,%zu])",
                  *sr.report.emotion_accuracy, static_cast<unsigned long long>(correct), n, ci.lo, ci.hi);
    const double secs = seconds_since(t0);
    ok = ok && secs < 600.0;
    detail += fmt("; total %.1f s (limit 600 s)", secs);
    return {ok, detail};
}

Outcome ac5() {
    std::size_t instances = 0;
    bool ok = true;
    const AuVocabulary vocab({6, 12});
    for (unsigned tmask = 0; tmask < 64; ++tmask)
        for (unsigned pmask = 0; pmask < 64; ++pmask) {
            const auto truth = decode_sets(tmask), pred = decode_sets(pmask);
            const AuBinaryCounts counts(vocab, truth, pred);
            const int aus[2] = {6, 12};
            double f1_sum = 0.0, acc_sum = 0.0;
            for (int a = 0; a < 2; ++a) {
                int tp = 0, fp = 0, fn = 0, tn = 0;
                for (int s = 0; s < 3; ++s) {
                    const bool t = tmask & (1u << (2 * s + a)), p = pmask & (1u << (2 * s + a));
                    tp += t && p;
                    fp += !t && p;
                    fn += t && !p;
                    tn += !t && !p;
                }
                const double f1 = 2 * tp + fp + fn == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
                const double acc = (tp + tn) / 3.0;
                ok = ok && counts.f1(aus[a]) == f1 && counts.accuracy(aus[a]) == acc;
                f1_sum += f1;
                acc_sum += acc;
            }
            ok = ok && counts.f1_average() == f1_sum / 2 && counts.accuracy_average() == acc_sum / 2;
            ++instances;

            // Consistency: every Happiness/other labelling of the 3 samples.
            for (unsigned labels = 1; labels < 8; ++labels) {
                std::vector<Emotion> em(3);
                int n = 0, both = 0, either = 0;
                for (int s = 0; s < 3; ++s) {
                    em[s] = (labels & (1u << s)) ? Emotion::happiness : Emotion::anger;
                    if (em[s] != Emotion::happiness) continue;
                    ++n;
                    both += pred[s].contains(6) && pred[s].contains(12);
                    either += pred[s].contains(6) || pred[s].contains(12);
                }
                const auto c = au_consistency(em, pred);
                ok = ok && c.both_rate == static_cast<double>(both) / n && c.either_rate == static_cast<double>(either) / n;
                ++instances;
            }
        }
    // Emotion accuracy over every 3-sample instance on 2 labels and 2-sample instance on 3 labels.
    for (std::size_t labels : {2u, 3u}) {
        const std::size_t n = labels == 2 ? 3 : 2;
        std::size_t combos = 1;
        for (std::size_t i = 0; i < 2 * n; ++i) combos *= labels;
        for (std::size_t c = 0; c < combos; ++c) {
            std::vector<Emotion> p(n), t(n);
            std::size_t code = c, correct = 0;
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = emotion_from_id(code % labels);
                code /= labels;
                t[i] = emotion_from_id(code % labels);
                code /= labels;
                correct += p[i] == t[i];
            }
            ok = ok && emotion_accuracy(p, t) == static_cast<double>(correct) / static_cast<double>(n);
            ++instances;
        }
    }

    std::mt19937_64 rng(1000);
    std::uniform_int_distribution<std::size_t> size(1, 50);
    std::bernoulli_distribution coin(0.5);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = size(rng);
        std::vector<Emotion> truth(n);
        std::vector<AuSet> pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = emotion_from_id(rng() % 7);
            for (int code : AuVocabulary::disfa8().codes())
                if (coin(rng)) pred[i].insert(code);
        }
        truth[0] = Emotion::happiness;
        const auto c = au_consistency(truth, pred);
        violations += c.both_rate > c.either_rate;
    }
    ok = ok && violations == 0;
    return {ok, fmt("%zu enumerated instances agree with counting oracles; both_rate <= either_rate on 1000 random "
                    "sets (%zu violations)",
                    instances, violations)};
}

Outcome ac6() {
    const auto t0 = Clock::now();
    const auto rules = EmotionRuleSet::emfacs_default();
    const auto hm = clean(FeatureKind::heatmap, AuVocabulary::heatmap10());
    auto test = hm[2];
    ablate_aus(test, {6});
    const auto heat = run_e3(BottleneckModel::heatmap_head(42), test, rules);

    const auto pv = clean(FeatureKind::probvec, AuVocabulary::disfa8());
    auto ptest = pv[2];
    ablate_aus(ptest, {6});
    const auto prob = run_e3(BottleneckModel::probvec_head(42, 8), ptest, rules);

    const auto& hc = *heat.report.consistency;
    const auto& pc = *prob.report.consistency;
    const double secs = seconds_since(t0);
    const bool ok = hc.both_rate == 0.0 && hc.either_rate == 1.0 && pc.both_rate == 0.0 && pc.either_rate == 1.0 &&
                    secs < 60.0;
    return {ok, fmt("AU6 zeroed: heatmap both %.2f either %.2f (%llu Happiness samples), probvec both %.2f either "
                    "%.2f (%llu); %.2f s (limit 60 s)",
                    hc.both_rate, hc.either_rate, static_cast<unsigned long long>(hc.samples), pc.both_rate,
                    pc.either_rate, static_cast<unsigned long long>(pc.samples), secs)};
}

Outcome ac7() {
    bool ok = true;
    std::string detail;
    const auto rules = EmotionRuleSet::emfacs_default();
    const auto base = fs::temp_directory_path() / "faukit_acceptance_ac7";
    fs::remove_all(base);

    // Datasets: manifests and every feature file.
    GenConfig gen;
    gen.n_samples = 200;
    for (const char* sub : {"a", "b"}) {
        auto m = generate_dataset(gen, rules, AuVocabulary::heatmap10(), FeatureKind::heatmap);
        write_features(m, base / sub);
        save_manifest(m, base / sub / "manifest.json");
    }
    bool data_same = slurp(base / "a" / "manifest.json") == slurp(base / "b" / "manifest.json");
    for (const auto& e : fs::directory_iterator(base / "a" / "features"))
        data_same = data_same && slurp(e.path()) == slurp(base / "b" / "features" / e.path().filename());
    ok = ok && data_same;
    detail += fmt("datasets identical %s; ", data_same ? "yes" : "no");

    // Trained checkpoints and reports, through the experiment runner.
    bool runs_same = true;
    for (auto which : {ExperimentKind::e1, ExperimentKind::e2, ExperimentKind::e3}) {
        ExperimentConfig cfg;
        cfg.which = which;
        cfg.gen.n_samples = 300;
        cfg.train.epochs = 10;
        const std::string stem = std::string(to_string(which)) + "_report";
        cfg.output_dir = base / "run_a";
        run_experiment(cfg);
        cfg.output_dir = base / "run_b";
        run_experiment(cfg);
        runs_same = runs_same && slurp(base / "run_a" / (stem + ".json")) == slurp(base / "run_b" / (stem + ".json")) &&
                    slurp(base / "run_a" / (stem + ".txt")) == slurp(base / "run_b" / (stem + ".txt"));
        if (which != ExperimentKind::e2)
            runs_same = runs_same && slurp(base / "run_a" / "model.faum") == slurp(base / "run_b" / "model.faum");
    }
    ok = ok && runs_same;
    detail += fmt("checkpoints and reports identical %s; ", runs_same ? "yes" : "no");

    // Round-trips.
    const auto heat = BottleneckModel::heatmap_head(3);
    save_checkpoint(heat, base / "heat.faum");
    const auto back = load_checkpoint(base / "heat.faum");
    std::vector<double> x(5760);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : x) v = u(rng);
    const bool ckpt = back == heat && back.forward(x) == heat.forward(x) &&
                      encode_checkpoint(back) == encode_checkpoint(heat);
    FeatureTensor t{{10, 24, 24}, std::vector<float>(5760)};
    for (auto& v : t.values) v = static_cast<float>(u(rng));
    write_feature_file(base / "t.faut", t);
    const bool feat = read_feature_file(base / "t.faut") == t;
    ok = ok && ckpt && feat;
    detail += fmt("checkpoint round-trip bit-exact %s; feature round-trip bit-exact %s", ckpt ? "yes" : "no",
                  feat ? "yes" : "no");
    fs::remove_all(base);
    return {ok, detail};
}

}  // namespace

int main() {
    report("AC1", "gradient correctness", ac1);
    report("AC2", "architecture fidelity", ac2);
    report("AC3", "coverage reproduction", ac3);
    report("AC4", "learnability", ac4);
    report("AC5", "metric oracles", ac5);
    report("AC6", "E3 structure reproduction", ac6);
    report("AC7", "determinism and round-trips", ac7);
    std::printf("%d of 7 criteria failed\n", failures);
    return failures;
}
