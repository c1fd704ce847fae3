// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "faukit/error.hpp"
#include "faukit/tensor_io.hpp"
#include "json.hpp"

namespace faukit {

using nlohmann::json;

std::string_view to_string(FeatureKind kind) noexcept {
    return kind == FeatureKind::heatmap ? "heatmap" : "probvec";
}

FeatureKind parse_feature_kind(std::string_view text) {
    if (text == "heatmap") return FeatureKind::heatmap;
    if (text == "probvec") return FeatureKind::probvec;
    throw ConfigError("unknown feature kind '" + std::string(text) + "' (expected heatmap or probvec)");
}

std::size_t DatasetManifest::feature_dim() const noexcept {
    if (shape.empty()) return 0;
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

bool DatasetManifest::has_au_truth() const noexcept {
    return !samples.empty() &&
           std::all_of(samples.begin(), samples.end(), [](const Sample& s) { return s.au_truth.has_value(); });
}

void DatasetManifest::validate() const {
    if (kind == FeatureKind::probvec && shape.size() != 1)
        throw ConfigError("probvec manifests need a 1-D shape");
    if (kind == FeatureKind::heatmap && shape.size() != 3)
        throw ConfigError("heatmap manifests need a 3-D shape (channels, height, width)");
    if (std::any_of(shape.begin(), shape.end(), [](auto d) { return d == 0; }))
        throw ConfigError("manifest shape has a zero dimension");
    if (shape.front() != vocabulary.size())
        throw DimensionError("manifest has " + std::to_string(shape.front()) + " AU channels but a vocabulary of " +
                             std::to_string(vocabulary.size()));
    const std::size_t dim = feature_dim();
    for (const auto& s : samples) {
        if (!s.features.empty() && s.features.size() != dim)
            throw DimensionError("sample " + std::to_string(s.id) + " has " + std::to_string(s.features.size()) +
                                 " features, expected " + std::to_string(dim));
        if (s.features.empty() && s.feature_path.empty())
            throw ConfigError("sample " + std::to_string(s.id) + " has neither a path nor inline features");
        if (s.au_truth)
            for (int code : *s.au_truth)
                if (!vocabulary.contains(code))
                    throw ConfigError("sample " + std::to_string(s.id) + " au_truth has AU" + std::to_string(code) +
                                      " outside the vocabulary");
    }
}

std::string manifest_to_json_text(const DatasetManifest& m) {
    nlohmann::ordered_json doc;
    doc["format"] = "faukit-manifest";
    doc["version"] = 1;
    doc["kind"] = to_string(m.kind);
    doc["shape"] = m.shape;
    doc["vocabulary"] = std::vector<int>(m.vocabulary.codes().begin(), m.vocabulary.codes().end());
    auto samples = nlohmann::ordered_json::array();
    for (const auto& s : m.samples) {
        nlohmann::ordered_json js;
        js["id"] = s.id;
        if (!s.feature_path.empty())
            js["path"] = s.feature_path;
        else
            js["features"] = s.features;
        js["emotion"] = to_string(s.emotion);
        if (s.au_truth) js["au_truth"] = std::vector<int>(s.au_truth->begin(), s.au_truth->end());
        samples.push_back(std::move(js));
    }
    doc["samples"] = std::move(samples);
    return doc.dump(1) + "\n";
}

DatasetManifest manifest_from_json_text(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", "") != "faukit-manifest")
            throw FormatError("not a faukit manifest (missing \"format\": \"faukit-manifest\")");
        if (doc.value("version", 0) != 1) throw FormatError("unsupported manifest version");
        DatasetManifest m;
        m.base_dir = base_dir;
        m.kind = parse_feature_kind(doc.at("kind").get<std::string>());
        m.shape = doc.at("shape").get<std::vector<std::uint32_t>>();
        m.vocabulary = AuVocabulary(doc.at("vocabulary").get<std::vector<int>>());
        for (const auto& js : doc.at("samples")) {
            Sample s;
            s.id = js.at("id").get<std::uint64_t>();
            if (js.contains("path")) s.feature_path = js["path"].get<std::string>();
            if (js.contains("features")) s.features = js["features"].get<std::vector<float>>();
            const auto& em = js.at("emotion");
            s.emotion = em.is_number_integer() ? emotion_from_id(em.get<std::size_t>())
                                               : parse_emotion(em.get<std::string>());
            if (js.contains("au_truth") && !js["au_truth"].is_null()) {
                auto codes = js["au_truth"].get<std::vector<int>>();
                s.au_truth = AuSet(codes.begin(), codes.end());
            }
            m.samples.push_back(std::move(s));
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return manifest_from_json_text(buffer.str(), path.parent_path());
    } catch (const FormatError& e) {
        throw FormatError(std::string(e.what()) + " (" + path.string() + ")");
    }
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write manifest " + path.string());
    out << manifest_to_json_text(manifest);
}

void write_features(DatasetManifest& manifest, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "features");
    for (auto& s : manifest.samples) {
        if (s.features.empty()) throw InputError("sample " + std::to_string(s.id) + " has no inline features");
        char name[64];
        std::snprintf(name, sizeof name, "features/%06llu.faut", static_cast<unsigned long long>(s.id));
        write_feature_file(dir / name, FeatureTensor{manifest.shape, s.features});
        s.feature_path = name;
    }
    manifest.base_dir = dir;
}

void load_features(DatasetManifest& manifest) {
    for (auto& s : manifest.samples) {
        if (!s.features.empty()) continue;
        std::filesystem::path p(s.feature_path);
        if (p.is_relative()) p = manifest.base_dir / p;
        FeatureTensor t = read_feature_file(p);
        if (t.dims != manifest.shape)
            throw DimensionError("feature file " + p.string() + " shape disagrees with the manifest");
        s.features = std::move(t.values);
    }
}

DatasetManifest load_dataset(const std::filesystem::path& manifest_path) {
    DatasetManifest m = load_manifest(manifest_path);
    load_features(m);
    return m;
}

std::array<std::size_t, 3> partition_sizes(std::size_t n, const SplitRatios& ratios) {
    const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
    for (double x : r)
        if (!(x > 0.0)) throw ConfigError("split ratios must be positive");
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
    if (n < 3) throw SizeError("cannot split " + std::to_string(n) + " samples into 3 partitions");

    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double exact = static_cast<double>(n) * r[i];
        double whole = std::floor(exact);
        // Values like 69.99999999999999 are products of inexact ratios, not remainders.
        if (exact - whole > 1.0 - 1e-9) whole += 1.0;
        sizes[i] = static_cast<std::size_t>(whole);
        frac[i] = std::max(0.0, exact - whole);
        assigned += sizes[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b] + 1e-12; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) sizes[order[k % 3]] += 1;
    while (assigned > n) {
        // Only reachable through the snap above; take back from the largest partition.
        auto it = std::max_element(sizes.begin(), sizes.end());
        --*it;
        --assigned;
    }
    return sizes;
}

std::array<DatasetManifest, 3> split_dataset(const DatasetManifest& manifest, const SplitRatios& ratios,
                                             std::uint64_t seed) {
    const std::size_t n = manifest.samples.size();
    const auto sizes = partition_sizes(n, ratios);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::array<DatasetManifest, 3> parts;
    std::size_t offset = 0;
    for (int p = 0; p < 3; ++p) {
        std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(offset),
                                     perm.begin() + static_cast<std::ptrdiff_t>(offset + sizes[p]));
        std::sort(idx.begin(), idx.end());
        DatasetManifest& part = parts[p];
        part.kind = manifest.kind;
        part.shape = manifest.shape;
        part.vocabulary = manifest.vocabulary;
        part.base_dir = manifest.base_dir;
        part.samples.reserve(idx.size());
        for (auto i : idx) part.samples.push_back(manifest.samples[i]);
        offset += sizes[p];
    }
    return parts;
}

LabeledMatrix to_matrix(const DatasetManifest& manifest) {
    LabeledMatrix out;
    out.rows = manifest.samples.size();
    out.cols = manifest.feature_dim();
    out.x.resize(out.rows * out.cols);
    out.y.reserve(out.rows);
    for (std::size_t i = 0; i < out.rows; ++i) {
        const Sample& s = manifest.samples[i];
        if (s.features.size() != out.cols)
            throw DimensionError("sample " + std::to_string(s.id) + " features not loaded or wrong size");
        std::copy(s.features.begin(), s.features.end(), out.x.begin() + static_cast<std::ptrdiff_t>(i * out.cols));
        out.y.push_back(s.emotion);
    }
    return out;
}

}  // namespace faukit
