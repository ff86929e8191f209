#pragma once

#include <filesystem>
#include <string>

#include "difreg/core/transform.hpp"

namespace difreg {

/// 4×4 row-major, whitespace separated. Bottom row must be 0 0 0 1 within 1e-6; rotation
/// drift up to 1e-4 is re-orthonormalised, anything larger is rejected (InvalidInput).
RigidTransform load_pose(const std::filesystem::path& path);
RigidTransform parse_pose(const std::string& text, const std::string& origin = "pose");

/// Full-precision (%.17g) text, one matrix row per line.
std::string format_pose(const RigidTransform& t);
void write_pose(const std::filesystem::path& path, const RigidTransform& t);

}  // namespace difreg
