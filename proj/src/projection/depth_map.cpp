#include "difreg/projection/depth_map.hpp"

#include <algorithm>

namespace difreg {

DepthMap::DepthMap(const CameraIntrinsics& k, const RigidTransform& view_pose)
    : intrinsics_(k), view_pose_(view_pose) {
    k.validate();
    depth_.assign(static_cast<std::size_t>(k.width) * static_cast<std::size_t>(k.height), 0.0);
}

std::size_t DepthMap::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(depth_.begin(), depth_.end(), [](double z) { return z > 0.0; }));
}

PixelPointMap::PixelPointMap(int width, int height, std::size_t point_count)
    : width_(width), height_(height),
      pixel_to_point_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kNone),
      point_to_pixel_(point_count, kNone) {}

void PixelPointMap::assign(int u, int v, std::size_t point) {
    const auto pix = idx(u, v);
    const auto previous = pixel_to_point_[pix];
    if (previous != kNone) point_to_pixel_[previous] = kNone;
    pixel_to_point_[pix] = static_cast<std::uint32_t>(point);
    point_to_pixel_[point] = static_cast<std::uint32_t>(pix);
}

std::vector<std::size_t> PixelPointMap::visible_points() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < point_to_pixel_.size(); ++i)
        if (point_to_pixel_[i] != kNone) out.push_back(i);
    return out;
}

}  // namespace difreg
