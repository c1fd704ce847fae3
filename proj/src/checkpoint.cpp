// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/detail/byte_io.hpp"
#include "faukit/error.hpp"
#include "faukit/model.hpp"

namespace faukit {

std::vector<std::uint8_t> encode_checkpoint(const BottleneckModel& model) {
    if (model.layer_count() > 255) throw DimensionError("checkpoint format holds at most 255 layers");
    detail::ByteWriter w;
    w.reserve(8 + 9 * model.layer_count() + 8 * model.parameter_count());
    w.bytes("FAUM");
    w.u16(kCheckpointVersion);
    w.u8(static_cast<std::uint8_t>(model.layer_count()));
    for (const auto& layer : model.layers()) {
        w.u32(static_cast<std::uint32_t>(layer.spec.in_dim));
        w.u32(static_cast<std::uint32_t>(layer.spec.out_dim));
        w.u8(static_cast<std::uint8_t>(layer.spec.activation));
    }
    for (const auto& layer : model.layers()) {
        for (double v : layer.weights) w.f64(v);
        for (double v : layer.bias) w.f64(v);
    }
    return std::move(w.buffer());
}

BottleneckModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "checkpoint");
    if (r.bytes(4) != "FAUM") throw FormatError("checkpoint: bad magic");
    if (auto v = r.u16(); v != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(v));
    const std::size_t count = r.u8();
    if (count == 0) throw FormatError("checkpoint: no layers");

    std::vector<DenseLayer> layers(count);
    std::uint64_t params = 0;
    for (auto& layer : layers) {
        layer.spec.in_dim = r.u32();
        layer.spec.out_dim = r.u32();
        const std::uint8_t act = r.u8();
        if (act > 1) throw FormatError("checkpoint: unknown activation tag " + std::to_string(act));
        layer.spec.activation = static_cast<Activation>(act);
        if (layer.spec.in_dim == 0 || layer.spec.out_dim == 0) throw FormatError("checkpoint: zero layer dimension");
        params += std::uint64_t{layer.spec.in_dim} * layer.spec.out_dim + layer.spec.out_dim;
    }
    if (r.remaining() != params * 8)
        throw FormatError(r.remaining() < params * 8 ? "checkpoint: truncated data"
                                                     : "checkpoint: trailing bytes after parameters");
    for (auto& layer : layers) {
        layer.weights.resize(layer.spec.in_dim * layer.spec.out_dim);
        for (auto& v : layer.weights) v = r.f64();
        layer.bias.resize(layer.spec.out_dim);
        for (auto& v : layer.bias) v = r.f64();
    }
    try {
        return BottleneckModel::from_layers(std::move(layers));
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const BottleneckModel& model, const std::filesystem::path& path) {
    detail::write_file_bytes(path.string(), encode_checkpoint(model));
}

BottleneckModel load_checkpoint(const std::filesystem::path& path) {
    try {
        return decode_checkpoint(detail::read_file_bytes(path.string(), "checkpoint"));
    } catch (const FormatError& e) {
        throw FormatError(std::string(e.what()) + " (" + path.string() + ")");
    }
}

}  // namespace faukit
