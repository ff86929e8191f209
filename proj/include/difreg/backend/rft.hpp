#pragma once

// RFT1 feature tensor files.
//
//   offset  size  field
//   0       4     magic "RFT1"
//   4       2     version (u16, currently 1)
//   6       2     layer_id (u16)
//   8       4     H (u32)
//   12      4     W (u32)
//   16      4     C (u32)
//   20      4·H·W·C  float32 payload, row-major H→W→C
//
// All integers and floats little-endian regardless of host byte order.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "difreg/features/feature_map.hpp"

namespace difreg {

inline constexpr std::uint16_t kRftVersion = 1;
inline constexpr std::size_t kRftHeaderBytes = 20;

std::vector<std::uint8_t> encode_rft(const FeatureMap& fm);
/// Throws FormatMagic, FormatDimensionOverflow, FormatPayloadLength or InvalidInput (non-finite).
FeatureMap decode_rft(const std::vector<std::uint8_t>& bytes);

void write_feature_file(const FeatureMap& fm, const std::filesystem::path& path);
/// Adds FileMissing / Io to decode_rft's errors.
FeatureMap load_feature_file(const std::filesystem::path& path);

/// "<pair_id>.<view>.<cloud>.layer<id>.rft"
std::string feature_file_name(const std::string& depth_id, int layer_id);

}  // namespace difreg
