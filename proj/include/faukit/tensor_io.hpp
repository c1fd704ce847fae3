// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Binary feature file ("FAUT"):
//
//   offset  size      field
//   0       4         magic "FAUT"
//   4       2         version, u16 = 1
//   6       1         dtype tag, u8 (1 = f32)
//   7       1         ndim, u8 (>= 1)
//   8       4*ndim    dims, u32 each
//   ...     4*prod    payload, f32, channel-major row-major
//
// All integers and floats are little-endian.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace faukit {

inline constexpr std::uint16_t kFeatureFileVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;

struct FeatureTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;

    std::size_t element_count() const noexcept;

    friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;
};

std::vector<std::uint8_t> encode_feature_tensor(const FeatureTensor& tensor);
/// Throws FormatError on bad magic, version, dtype, zero dims, or a payload
/// that is shorter or longer than the dims announce.
FeatureTensor decode_feature_tensor(std::span<const std::uint8_t> bytes);

void write_feature_file(const std::filesystem::path& path, const FeatureTensor& tensor);
FeatureTensor read_feature_file(const std::filesystem::path& path);

}  // namespace faukit
