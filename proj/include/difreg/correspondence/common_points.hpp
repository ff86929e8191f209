#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "difreg/core/types.hpp"

namespace difreg {

enum class CloudSide { P, Q };
enum class ViewSide { Ref, Src };

std::string_view to_string(CloudSide s) noexcept;
std::string_view to_string(ViewSide v) noexcept;

/// Keypoints that have both a 3D descriptor and a view (pixel) feature.
struct CommonPointSet {
    CloudSide side = CloudSide::P;
    ViewSide view = ViewSide::Ref;
    std::vector<std::size_t> point_ids;  // keypoint's index in its cloud
    std::vector<std::size_t> partners;   // index into the projected set
    std::vector<double> distances;

    std::size_t size() const noexcept { return point_ids.size(); }
};

/// Keypoint k is common iff its nearest projected point is strictly closer than `thresh`.
/// `keypoint_ids[k]` tags keypoints[k] in the result.
CommonPointSet find_common_points(std::span<const Vec3> keypoints, std::span<const std::size_t> keypoint_ids,
                                  std::span<const Vec3> projected, double thresh);

}  // namespace difreg
