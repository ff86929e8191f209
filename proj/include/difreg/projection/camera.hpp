#pragma once

#include "difreg/core/transform.hpp"

namespace difreg {

/// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
    double fx = 585.0;
    double fy = 585.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;

    /// fx, fy > 0; 0 <= cx < width; 0 <= cy < height. Throws InvalidInput otherwise.
    void validate() const;

    /// Same field of view at a different raster size.
    CameraIntrinsics resized(int new_width, int new_height) const;

    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Virtual camera aligned with the cloud frame's axes, looking down +z at the centroid,
/// backed off until the sphere holding 95% of the points fits inside the frustum.
RigidTransform auto_frame(std::span<const Vec3> points, const CameraIntrinsics& k);

}  // namespace difreg
