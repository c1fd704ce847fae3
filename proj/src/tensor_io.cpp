// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/tensor_io.hpp"

#include <fstream>
#include <iterator>

#include "faukit/detail/byte_io.hpp"
#include "faukit/error.hpp"

namespace faukit {

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::string& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + what + " " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw InputError("short write to " + path);
}

}  // namespace detail

std::size_t FeatureTensor::element_count() const noexcept {
    if (dims.empty()) return 0;
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::vector<std::uint8_t> encode_feature_tensor(const FeatureTensor& tensor) {
    if (tensor.dims.empty() || tensor.dims.size() > 255) throw DimensionError("feature tensor needs 1..255 dims");
    for (auto d : tensor.dims)
        if (d == 0) throw DimensionError("feature tensor dims must be positive");
    if (tensor.values.size() != tensor.element_count())
        throw DimensionError("feature tensor payload does not match its dims");

    detail::ByteWriter w;
    w.reserve(8 + 4 * tensor.dims.size() + 4 * tensor.values.size());
    w.bytes("FAUT");
    w.u16(kFeatureFileVersion);
    w.u8(kDtypeF32);
    w.u8(static_cast<std::uint8_t>(tensor.dims.size()));
    for (auto d : tensor.dims) w.u32(d);
    for (float v : tensor.values) w.f32(v);
    return std::move(w.buffer());
}

FeatureTensor decode_feature_tensor(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "feature file");
    if (r.bytes(4) != "FAUT") throw FormatError("feature file: bad magic");
    if (auto v = r.u16(); v != kFeatureFileVersion)
        throw FormatError("feature file: unsupported version " + std::to_string(v));
    if (auto t = r.u8(); t != kDtypeF32) throw FormatError("feature file: unsupported dtype tag " + std::to_string(t));
    const std::uint8_t ndim = r.u8();
    if (ndim == 0) throw FormatError("feature file: ndim is zero");

    FeatureTensor t;
    std::uint64_t count = 1;
    for (std::uint8_t i = 0; i < ndim; ++i) {
        const std::uint32_t d = r.u32();
        if (d == 0) throw FormatError("feature file: zero-length dimension");
        count *= d;
        if (count > (std::uint64_t{1} << 34)) throw FormatError("feature file: implausible size");
        t.dims.push_back(d);
    }
    if (r.remaining() != count * 4)
        throw FormatError(r.remaining() < count * 4 ? "feature file: truncated data"
                                                    : "feature file: trailing bytes after payload");
    t.values.resize(count);
    for (auto& v : t.values) v = r.f32();
    return t;
}

void write_feature_file(const std::filesystem::path& path, const FeatureTensor& tensor) {
    detail::write_file_bytes(path.string(), encode_feature_tensor(tensor));
}

FeatureTensor read_feature_file(const std::filesystem::path& path) {
    try {
        return decode_feature_tensor(detail::read_file_bytes(path.string(), "feature file"));
    } catch (const FormatError& e) {
        throw FormatError(std::string(e.what()) + " (" + path.string() + ")");
    }
}

}  // namespace faukit
