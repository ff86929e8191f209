#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "difreg/core/types.hpp"

namespace difreg {

struct PlyData {
    std::vector<Vec3> points;
    /// Per-vertex descriptors from `desc_0 … desc_{D-1}` properties; empty when absent.
    FeatureMatrix descriptors;
};

enum class PlyFormat { Ascii, BinaryLittleEndian };
enum class PlyScalar { Float32, Float64 };

/// ASCII or binary little-endian; x, y, z may be float or double; unknown vertex properties
/// and non-vertex elements are skipped. Throws FileMissing or Parse (with line or byte offset).
PlyData read_ply(const std::filesystem::path& path);

/// Points only; keypoints and descriptors left empty.
PointCloud load_ply(const std::filesystem::path& path);

void write_ply(const std::filesystem::path& path, std::span<const Vec3> points, const FeatureMatrix* descriptors,
               PlyFormat format = PlyFormat::BinaryLittleEndian, PlyScalar scalar = PlyScalar::Float32);

}  // namespace difreg
