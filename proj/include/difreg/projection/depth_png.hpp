#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "difreg/projection/depth_map.hpp"

namespace difreg {

/// Raw 16-bit millimetre depth raster as stored on disk (0 = invalid).
struct DepthImage16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;

    friend bool operator==(const DepthImage16&, const DepthImage16&) = default;
};

DepthImage16 quantize_mm(const DepthMap& d);
DepthMap dequantize_mm(const DepthImage16& img, const CameraIntrinsics& k, const RigidTransform& view_pose);

void write_depth_png(const std::filesystem::path& path, const DepthImage16& img);
/// Throws FileMissing / Parse (not a 16-bit grayscale PNG).
DepthImage16 read_depth_png(const std::filesystem::path& path);

}  // namespace difreg
