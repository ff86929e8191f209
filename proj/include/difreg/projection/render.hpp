#pragma once

#include <optional>
#include <span>
#include <vector>

#include "difreg/core/types.hpp"
#include "difreg/projection/depth_map.hpp"

namespace difreg {

struct RenderedView {
    DepthMap depth;
    PixelPointMap pixels;
};

/// Z-buffered pinhole render; the nearest point wins each pixel (lowest index on ties).
/// Throws EmptyRender if every point is culled.
RenderedView render_depth(std::span<const Vec3> points, const RigidTransform& view_pose,
                          const CameraIntrinsics& k);
inline RenderedView render_depth(const PointCloud& cloud, const RigidTransform& view_pose,
                                 const CameraIntrinsics& k) {
    return render_depth(cloud.points, view_pose, k);
}

/// Hole filling by morphological closing of the validity mask, repeated `passes` times.
/// Newly valid pixels take the minimum valid depth inside their window; valid pixels are
/// never modified. Out-of-image pixels count as valid during erosion.
DepthMap densify_depth(const DepthMap& d, int kernel = 3, int passes = 1);

/// Camera-frame point of a pixel at depth z.
Vec3 backproject_pixel(const CameraIntrinsics& k, int u, int v, double z);
/// Projection of a camera-frame point onto the raster (nullopt when culled).
std::optional<Pixel> project_point(const CameraIntrinsics& k, const Vec3& camera_point);

/// Camera-frame points of every valid pixel, row-major order.
std::vector<Vec3> backproject(const DepthMap& d);

struct BackprojectedPixels {
    std::vector<Vec3> points;           // in the depth map's world frame
    std::vector<std::uint32_t> pixels;  // linear pixel index of each point
};
/// Valid pixels lifted back into the frame the cloud was rendered from.
BackprojectedPixels backproject_to_world(const DepthMap& d);

/// Two views, each holding the reference (P) and source (Q) renders.
struct ViewPairs {
    RenderedView ref_p;  // P, reference viewpoint
    RenderedView ref_q;  // T_init·Q, reference viewpoint
    RenderedView src_p;  // T_init⁻¹·P, source viewpoint
    RenderedView src_q;  // Q, source viewpoint
};

ViewPairs make_view_pairs(const PointCloud& ref, const PointCloud& src, const RigidTransform& t_init,
                          const CameraIntrinsics& k);

}  // namespace difreg
