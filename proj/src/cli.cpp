// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "faukit/dataset.hpp"
#include "faukit/error.hpp"
#include "faukit/experiments.hpp"
#include "faukit/facs.hpp"
#include "faukit/metrics.hpp"
#include "faukit/model.hpp"
#include "faukit/synth.hpp"
#include "faukit/tensor_io.hpp"
#include "faukit/train.hpp"
#include "json.hpp"

namespace faukit::cli {

ExitCode classify(const std::exception& e) noexcept {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const CLI::ParseError*>(&e)) return ExitCode::usage;
    if (dynamic_cast<const NumericError*>(&e)) return ExitCode::numeric;
    if (dynamic_cast<const Error*>(&e) || dynamic_cast<const std::filesystem::filesystem_error*>(&e))
        return ExitCode::data;
    return ExitCode::data;
}

namespace {

constexpr std::uint64_t kFallbackSeed = 42;

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("cannot parse '" + text + "' for --" + flag + " (expected comma separated numbers)");
        }
    }
    return out;
}

AuSet parse_au_list(const std::string& text) {
    if (text.empty()) return {};
    const AuVocabulary v = AuVocabulary::parse(text);
    return v.as_set();
}

SplitRatios parse_split(const std::string& text) {
    const auto r = parse_number_list(text, "split");
    if (r.size() != 3) throw UsageError("--split needs three comma separated ratios");
    return {r[0], r[1], r[2]};
}

/// Flags win over the config file, which wins over FAUKIT_SEED.
struct SeedOption {
    std::uint64_t value = kFallbackSeed;
    CLI::Option* option = nullptr;

    void attach(CLI::App* app) {
        option = app->add_option("--seed", value, "Random seed (default: $FAUKIT_SEED, else 42)");
    }
    void resolve() {
        if (option->count() > 0) return;
        if (const char* env = std::getenv("FAUKIT_SEED")) {
            try {
                std::size_t used = 0;
                value = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument(env);
            } catch (const std::exception&) {
                throw UsageError(std::string("FAUKIT_SEED is not an unsigned integer: ") + env);
            }
        }
    }
};

std::string config_value_string(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        std::ostringstream s;
        s.precision(17);
        s << v.get<double>();
        return s.str();
    }
    if (v.is_array()) {
        std::string joined;
        for (const auto& item : v) {
            if (!joined.empty()) joined += ",";
            joined += config_value_string(item, key);
        }
        return joined;
    }
    throw UsageError("config key '" + key + "' has an unsupported value type");
}

/// Fills options of `sub` that were not given on the command line from a
/// JSON object whose keys are flag names without the leading dashes.
void merge_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw FormatError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "config") throw UsageError("config files cannot include other config files");
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "help")
            throw UsageError("unknown config key '" + key + "' for subcommand " + sub->get_name());
        if (opt->count() > 0) continue;
        opt->add_result(config_value_string(value, key));
        opt->run_callback();
    }
}

void require(CLI::App* sub, std::initializer_list<const char*> flags) {
    for (const char* f : flags) {
        CLI::Option* opt = sub->get_option(std::string("--") + f);
        if (opt->count() == 0 && opt->get_default_str().empty())
            throw UsageError(sub->get_name() + ": missing required option --" + f);
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"faukit: AU-feature emotion classifier toolkit", "faukit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand and flag");

    // gen-data -----------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic labelled AU dataset with train/val/test splits");
    GenConfig gcfg;
    SeedOption gen_seed;
    std::string gen_kind = "probvec", gen_out, gen_vocab, gen_rules = "default", gen_split = "0.7,0.15,0.15";
    std::size_t gen_grid = 24;
    std::string gen_config;
    gen->add_option("--config", gen_config, "JSON file with flag values (flags on the command line win)");
    gen->add_option("--n", gcfg.n_samples, "Number of samples")->capture_default_str();
    gen_seed.attach(gen);
    gen->add_option("--noise", gcfg.noise_sigma, "Noise sigma")->capture_default_str();
    gen->add_option("--spurious", gcfg.spurious_rate, "Chance of activating each non-prototype AU")
        ->capture_default_str();
    gen->add_option("--kind", gen_kind, "Feature kind")
        ->check(CLI::IsMember({"heatmap", "probvec"}))
        ->capture_default_str();
    gen->add_option("--out", gen_out, "Output directory");
    gen->add_option("--vocab", gen_vocab, "AU vocabulary: disfa8, disfa12, bp4d12, heatmap10, all or a list like 1,2,4");
    gen->add_option("--rules", gen_rules, "Rules file or 'default'")->capture_default_str();
    gen->add_option("--split", gen_split, "train,val,test ratios")->capture_default_str();
    gen->add_option("--intensity-lo", gcfg.intensity_lo, "Lowest AU intensity")->capture_default_str();
    gen->add_option("--intensity-hi", gcfg.intensity_hi, "Highest AU intensity")->capture_default_str();
    gen->add_option("--sigma", gcfg.gaussian_sigma, "Gaussian heatmap sigma in cells")->capture_default_str();
    gen->add_option("--grid", gen_grid, "Heatmap grid size (square)")->capture_default_str();

    // train --------------------------------------------------------------------
    auto* trn = app.add_subcommand("train", "Train a bottleneck head on a manifest");
    TrainConfig tcfg;
    SeedOption train_seed;
    std::string trn_manifest, trn_val, trn_head, trn_out, trn_opt = "adam", trn_history, trn_config;
    bool trn_quiet = false;
    trn->add_option("--config", trn_config, "JSON file with flag values (flags on the command line win)");
    trn->add_option("--manifest", trn_manifest, "Training manifest");
    trn->add_option("--val-manifest", trn_val, "Validation manifest");
    trn->add_option("--head", trn_head, "Head variant (default: matches the feature kind)")
        ->check(CLI::IsMember({"heatmap5", "probvec1"}));
    trn->add_option("--lr", tcfg.learning_rate, "Learning rate")->capture_default_str();
    trn->add_option("--epochs", tcfg.epochs, "Maximum epochs")->capture_default_str();
    train_seed.attach(trn);
    trn->add_option("--batch", tcfg.batch_size, "Mini-batch size")->capture_default_str();
    trn->add_option("--optimizer", trn_opt, "Optimizer")->check(CLI::IsMember({"sgd", "adam"}))->capture_default_str();
    trn->add_option("--l2", tcfg.l2_weight, "L2 weight decay")->capture_default_str();
    trn->add_option("--patience", tcfg.patience, "Early-stop patience in epochs (0 disables)")->capture_default_str();
    trn->add_option("--out", trn_out, "Checkpoint path (.faum)");
    trn->add_option("--history", trn_history, "Write per-epoch history JSON here");
    trn->add_flag("--quiet", trn_quiet, "Do not print per-epoch progress");

    // eval ---------------------------------------------------------------------
    auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
    std::string ev_model, ev_manifest, ev_report, ev_rules = "default", ev_config;
    evl->add_option("--config", ev_config, "JSON file with flag values (flags on the command line win)");
    evl->add_option("--model", ev_model, "Checkpoint (.faum)");
    evl->add_option("--manifest", ev_manifest, "Manifest to evaluate");
    evl->add_option("--report", ev_report, "Write the JSON report here");
    evl->add_option("--rules", ev_rules, "Rules file or 'default'")->capture_default_str();

    // explain ------------------------------------------------------------------
    auto* exp = app.add_subcommand("explain", "Dual-output explainability: predicted emotion plus AU read-out");
    std::string ex_model, ex_manifest, ex_report, ex_rules = "default", ex_target = "Happiness", ex_ablate, ex_config;
    exp->add_option("--config", ex_config, "JSON file with flag values (flags on the command line win)");
    exp->add_option("--model", ex_model, "Checkpoint (.faum)");
    exp->add_option("--manifest", ex_manifest, "Manifest to explain");
    exp->add_option("--rules", ex_rules, "Rules file or 'default'")->capture_default_str();
    exp->add_option("--report", ex_report, "Write the JSON report here");
    exp->add_option("--target", ex_target, "Emotion whose AU prototype is checked")->capture_default_str();
    exp->add_option("--ablate", ex_ablate, "Zero these AU channels first, e.g. 6 or 6,12");

    // coverage -----------------------------------------------------------------
    auto* cov = app.add_subcommand("coverage", "List emotions whose full prototype a vocabulary can detect");
    std::string cov_rules = "default", cov_vocab = "disfa8", cov_config;
    cov->add_option("--config", cov_config, "JSON file with flag values (flags on the command line win)");
    cov->add_option("--rules", cov_rules, "Rules file or 'default'")->capture_default_str();
    cov->add_option("--vocab", cov_vocab, "AU vocabulary preset or list")->capture_default_str();

    // inspect ------------------------------------------------------------------
    auto* ins = app.add_subcommand("inspect", "Print shape and per-channel statistics of a feature file");
    std::string ins_file;
    ins->add_option("file", ins_file, "Feature file (.faut)")->required();

    // experiment ---------------------------------------------------------------
    auto* xpr = app.add_subcommand("experiment", "Run experiment e1 (accuracy), e2 (AU read-out) or e3 (AND/OR)");
    ExperimentConfig xcfg;
    SeedOption xp_seed;
    std::string xp_which = "e1", xp_data, xp_kind = "probvec", xp_head, xp_vocab, xp_out = "experiment_out";
    std::string xp_noise_levels = "0,0.1,0.2,0.3", xp_ablate, xp_model, xp_target = "Happiness", xp_config;
    std::string xp_rules = "default", xp_split = "0.7,0.15,0.15";
    bool xp_shuffle = false;
    xpr->add_option("--config", xp_config, "JSON file with flag values (flags on the command line win)");
    xpr->add_option("--which", xp_which, "Experiment")->check(CLI::IsMember({"e1", "e2", "e3"}))->capture_default_str();
    xpr->add_option("--data", xp_data, "Directory with train.json/val.json/test.json (default: generate)");
    xpr->add_option("--kind", xp_kind, "Feature kind when generating")
        ->check(CLI::IsMember({"heatmap", "probvec"}))
        ->capture_default_str();
    xpr->add_option("--head", xp_head, "Head variant (default: matches the feature kind)")
        ->check(CLI::IsMember({"heatmap5", "probvec1"}));
    xpr->add_option("--vocab", xp_vocab, "AU vocabulary when generating");
    xpr->add_option("--n", xcfg.gen.n_samples, "Samples to generate")->capture_default_str();
    xpr->add_option("--noise", xcfg.gen.noise_sigma, "Generator noise sigma")->capture_default_str();
    xpr->add_option("--spurious", xcfg.gen.spurious_rate, "Generator spurious AU rate")->capture_default_str();
    xpr->add_option("--split", xp_split, "train,val,test ratios")->capture_default_str();
    xpr->add_option("--rules", xp_rules, "Rules file or 'default'")->capture_default_str();
    xpr->add_option("--out", xp_out, "Output directory")->capture_default_str();
    xp_seed.attach(xpr);
    xpr->add_option("--epochs", xcfg.train.epochs, "Maximum epochs")->capture_default_str();
    xpr->add_option("--lr", xcfg.train.learning_rate, "Learning rate")->capture_default_str();
    xpr->add_option("--batch", xcfg.train.batch_size, "Mini-batch size")->capture_default_str();
    xpr->add_option("--patience", xcfg.train.patience, "Early-stop patience")->capture_default_str();
    xpr->add_flag("--shuffle-labels", xp_shuffle, "E1 control: permute emotion labels before training");
    xpr->add_option("--noise-levels", xp_noise_levels, "E2 noise sweep, comma separated")->capture_default_str();
    xpr->add_option("--ablate", xp_ablate, "E3: zero these AU channels in the test set");
    xpr->add_option("--model", xp_model, "E3: evaluate this checkpoint instead of training");
    xpr->add_option("--target", xp_target, "E3 target emotion")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help("", CLI::AppFormatMode::All)
                                              : app.get_subcommands().front()->help());
        return static_cast<int>(ExitCode::ok);
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return static_cast<int>(ExitCode::ok);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
        return static_cast<int>(ExitCode::usage);
    }

    try {
        if (*gen) {
            if (!gen_config.empty()) merge_config(gen, gen_config);
            require(gen, {"out"});
            gen_seed.resolve();
            gcfg.seed = gen_seed.value;
            const FeatureKind kind = parse_feature_kind(gen_kind);
            if (gen_vocab.empty()) gen_vocab = kind == FeatureKind::heatmap ? "heatmap10" : "disfa8";
            const AuVocabulary vocab = AuVocabulary::parse(gen_vocab);
            const EmotionRuleSet rules = EmotionRuleSet::resolve(gen_rules);
            gcfg.grid_height = gcfg.grid_width = gen_grid;
            if (gen_grid != 24) gcfg.au_centers = scaled_au_centers(gen_grid, gen_grid);

            DatasetManifest all = generate_dataset(gcfg, rules, vocab, kind);
            const std::filesystem::path dir(gen_out);
            write_features(all, dir);
            save_manifest(all, dir / "manifest.json");
            const auto parts = split_dataset(all, parse_split(gen_split), gcfg.seed);
            const char* names[3] = {"train.json", "val.json", "test.json"};
            for (int p = 0; p < 3; ++p) save_manifest(parts[p], dir / names[p]);
            out << "wrote " << all.samples.size() << " " << to_string(kind) << " samples to " << dir.string()
                << " (train " << parts[0].samples.size() << ", val " << parts[1].samples.size() << ", test "
                << parts[2].samples.size() << ")\n";
        } else if (*trn) {
            if (!trn_config.empty()) merge_config(trn, trn_config);
            require(trn, {"manifest", "val-manifest", "out"});
            train_seed.resolve();
            tcfg.seed = train_seed.value;
            tcfg.optimizer = parse_optimizer(trn_opt);
            const DatasetManifest train_set = load_dataset(trn_manifest);
            const DatasetManifest val_set = load_dataset(trn_val);
            const HeadKind head = trn_head.empty() ? (train_set.kind == FeatureKind::heatmap ? HeadKind::heatmap5
                                                                                           : HeadKind::probvec1)
                                                   : parse_head_kind(trn_head);
            const BottleneckModel initial = make_head(head, train_set, tcfg.seed);
            const TrainResult result =
                train(initial, to_matrix(train_set), to_matrix(val_set), tcfg, [&](const EpochRecord& r) {
                    if (trn_quiet) return;
                    char line[128];
                    std::snprintf(line, sizeof line, "epoch %3zu  loss %.6f  val_acc %.4f\n", r.epoch, r.train_loss,
                                  r.val_accuracy);
                    out << line << std::flush;
                });
            save_checkpoint(result.model, trn_out);
            if (!trn_history.empty()) {
                nlohmann::ordered_json h = nlohmann::ordered_json::array();
                for (const auto& r : result.history)
                    h.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_accuracy", r.val_accuracy}});
                write_text(trn_history, h.dump(2) + "\n");
            }
            out << "best epoch " << result.best_epoch << " val_acc " << format_number(result.best_val_accuracy)
                << " -> " << trn_out << "\n";
        } else if (*evl) {
            if (!ev_config.empty()) merge_config(evl, ev_config);
            require(evl, {"model", "manifest"});
            const BottleneckModel model = load_checkpoint(ev_model);
            const DatasetManifest data = load_dataset(ev_manifest);
            const EvaluationReport report = evaluate(model, data, EmotionRuleSet::resolve(ev_rules));
            out << render_report(report);
            if (!ev_report.empty()) write_text(ev_report, report_to_json_text(report));
        } else if (*exp) {
            if (!ex_config.empty()) merge_config(exp, ex_config);
            require(exp, {"model", "manifest"});
            const BottleneckModel model = load_checkpoint(ex_model);
            DatasetManifest data = load_dataset(ex_manifest);
            if (!ex_ablate.empty()) ablate_aus(data, parse_au_list(ex_ablate));
            const E3Result result = run_e3(model, data, EmotionRuleSet::resolve(ex_rules), parse_emotion(ex_target));
            out << render_report(result.report);
            if (result.full_match_rate)
                out << "Full prototype matches among " << to_string(result.target)
                    << " predictions: " << format_number(*result.full_match_rate) << "\n";
            if (!ex_report.empty()) write_text(ex_report, e3_to_json_text(result));
        } else if (*cov) {
            if (!cov_config.empty()) merge_config(cov, cov_config);
            const EmotionRuleSet rules = EmotionRuleSet::resolve(cov_rules);
            for (Emotion e : coverage(rules, AuVocabulary::parse(cov_vocab))) out << to_string(e) << "\n";
        } else if (*ins) {
            const FeatureTensor t = read_feature_file(ins_file);
            std::string dims;
            for (std::size_t i = 0; i < t.dims.size(); ++i) dims += (i ? "×" : "") + std::to_string(t.dims[i]);
            out << "shape: " << dims << " (" << t.values.size() << " values)\n";
            const std::size_t channels = t.dims.size() > 1 ? t.dims[0] : 1;
            const std::size_t plane = t.values.size() / channels;
            for (std::size_t c = 0; c < channels; ++c) {
                auto first = t.values.begin() + static_cast<std::ptrdiff_t>(c * plane);
                auto last = first + static_cast<std::ptrdiff_t>(plane);
                double sum = 0.0;
                for (auto it = first; it != last; ++it) sum += *it;
                const auto [lo, hi] = std::minmax_element(first, last);
                out << (channels > 1 ? "channel " + std::to_string(c) : std::string("values")) << ": min=" << format_number(*lo)
                    << " max=" << format_number(*hi) << " mean=" << format_number(sum / static_cast<double>(plane))
                    << "\n";
            }
        } else if (*xpr) {
            if (!xp_config.empty()) merge_config(xpr, xp_config);
            xp_seed.resolve();
            xcfg.which = parse_experiment(xp_which);
            xcfg.data_dir = xp_data;
            xcfg.kind = parse_feature_kind(xp_kind);
            xcfg.head = !xp_head.empty() ? parse_head_kind(xp_head)
                                         : (xcfg.kind == FeatureKind::heatmap ? HeadKind::heatmap5 : HeadKind::probvec1);
            if (!xp_data.empty() && xp_head.empty()) {
                const DatasetManifest probe = load_manifest(std::filesystem::path(xp_data) / "train.json");
                xcfg.head = probe.kind == FeatureKind::heatmap ? HeadKind::heatmap5 : HeadKind::probvec1;
            }
            if (xp_vocab.empty()) xp_vocab = xcfg.kind == FeatureKind::heatmap ? "heatmap10" : "disfa8";
            xcfg.vocabulary = AuVocabulary::parse(xp_vocab);
            xcfg.split = parse_split(xp_split);
            xcfg.rules = xp_rules;
            xcfg.output_dir = xp_out;
            xcfg.seed = xp_seed.value;
            xcfg.gen.seed = xp_seed.value;
            xcfg.train.seed = xp_seed.value;
            xcfg.shuffle_labels = xp_shuffle;
            xcfg.noise_levels = parse_number_list(xp_noise_levels, "noise-levels");
            xcfg.ablate = parse_au_list(xp_ablate);
            xcfg.model_path = xp_model;
            xcfg.target = parse_emotion(xp_target);
            run_experiment(xcfg);
            const std::string stem = std::string(to_string(xcfg.which)) + "_report";
            std::ifstream table(xcfg.output_dir / (stem + ".txt"));
            out << table.rdbuf();
            out << "reports written to " << xcfg.output_dir.string() << "\n";
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(classify(e));
    }
    return static_cast<int>(ExitCode::ok);
}

}  // namespace faukit::cli
