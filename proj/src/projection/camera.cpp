#include "difreg/projection/camera.hpp"

#include <algorithm>
#include <cmath>

#include "difreg/core/error.hpp"

namespace difreg {

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::InvalidInput, "intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) fail(ErrorCode::InvalidInput, "intrinsics: raster size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        fail(ErrorCode::InvalidInput, "intrinsics: principal point outside the raster");
}

CameraIntrinsics CameraIntrinsics::resized(int new_width, int new_height) const {
    const double sx = static_cast<double>(new_width) / width;
    const double sy = static_cast<double>(new_height) / height;
    // Pixel-centre convention: centre of pixel 0 sits at 0.5 raster units.
    return {fx * sx, fy * sy, (cx + 0.5) * sx - 0.5, (cy + 0.5) * sy - 0.5, new_width, new_height};
}

RigidTransform auto_frame(std::span<const Vec3> points, const CameraIntrinsics& k) {
    k.validate();
    if (points.empty()) fail(ErrorCode::InvalidInput, "auto_frame: empty cloud");

    Vec3 centroid = Vec3::Zero();
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());

    std::vector<double> radii;
    radii.reserve(points.size());
    for (const auto& p : points) radii.push_back((p - centroid).norm());
    const auto nth = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(radii.size() - 1)));
    std::nth_element(radii.begin(), radii.begin() + static_cast<std::ptrdiff_t>(nth), radii.end());
    const double r95 = radii[nth];

    // Half-angle of the cone inscribed in the frustum, measured from the principal ray.
    const double half_w = std::min(k.cx + 0.5, k.width - 0.5 - k.cx) / k.fx;
    const double half_h = std::min(k.cy + 0.5, k.height - 0.5 - k.cy) / k.fy;
    const double theta = std::atan(std::min(half_w, half_h));
    const double distance = std::max(r95 / std::sin(theta), 0.1);

    // Camera centre c - d·ẑ, axes aligned with the cloud frame.
    const Vec3 eye = centroid - distance * Vec3::UnitZ();
    return {Mat3::Identity(), -eye};
}

}  // namespace difreg
