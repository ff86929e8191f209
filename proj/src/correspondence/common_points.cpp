#include "difreg/correspondence/common_points.hpp"

#include "difreg/core/error.hpp"
#include "difreg/core/spatial_index.hpp"

namespace difreg {

std::string_view to_string(CloudSide s) noexcept { return s == CloudSide::P ? "p" : "q"; }
std::string_view to_string(ViewSide v) noexcept { return v == ViewSide::Ref ? "ref" : "src"; }

CommonPointSet find_common_points(std::span<const Vec3> keypoints, std::span<const std::size_t> keypoint_ids,
                                  std::span<const Vec3> projected, double thresh) {
    if (!(thresh > 0.0)) fail(ErrorCode::InvalidInput, "find_common_points: threshold must be positive");
    if (keypoints.size() != keypoint_ids.size())
        fail(ErrorCode::InvalidInput, "find_common_points: keypoints and ids differ in length");
    CommonPointSet out;
    if (keypoints.empty() || projected.empty()) return out;
    const SpatialIndex index(projected);
    for (std::size_t k = 0; k < keypoints.size(); ++k) {
        const auto nn = index.nearest(keypoints[k]);
        if (nn.distance < thresh) {
            out.point_ids.push_back(keypoint_ids[k]);
            out.partners.push_back(nn.index);
            out.distances.push_back(nn.distance);
        }
    }
    return out;
}

}  // namespace difreg
