#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "difreg/core/types.hpp"

namespace difreg {

/// Farthest-point sampling of `count` indices starting from `start` (all indices when
/// count >= size). Ties go to the lowest index.
std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t count, std::size_t start);

}  // namespace difreg
