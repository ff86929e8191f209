#include "difreg/projection/render.hpp"

#include <cmath>
#include <limits>

#include "difreg/core/error.hpp"

namespace difreg {

std::optional<Pixel> project_point(const CameraIntrinsics& k, const Vec3& c) {
    const double z = c.z();
    if (!(z > kDepthMin) || z > kDepthMax) return std::nullopt;
    const double u = k.fx * c.x() / z + k.cx;
    const double v = k.fy * c.y() / z + k.cy;
    const double fu = std::floor(u + 0.5);
    const double fv = std::floor(v + 0.5);
    if (fu < 0.0 || fv < 0.0 || fu >= k.width || fv >= k.height) return std::nullopt;
    return Pixel{static_cast<int>(fu), static_cast<int>(fv)};
}

Vec3 backproject_pixel(const CameraIntrinsics& k, int u, int v, double z) {
    return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

RenderedView render_depth(std::span<const Vec3> points, const RigidTransform& view_pose,
                          const CameraIntrinsics& k) {
    if (points.empty()) fail(ErrorCode::InvalidInput, "render_depth: empty cloud");
    if (points.size() >= PixelPointMap::kNone) fail(ErrorCode::InvalidInput, "render_depth: cloud too large");
    RenderedView out{DepthMap(k, view_pose), PixelPointMap(k.width, k.height, points.size())};

    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].allFinite()) fail(ErrorCode::InvalidInput, "render_depth: non-finite point");
        const Vec3 c = view_pose.apply(points[i]);
        const auto px = project_point(k, c);
        if (!px) continue;
        double& slot = out.depth.at(px->u, px->v);
        // Strict comparison keeps the lowest index among equal depths.
        if (slot == 0.0 || c.z() < slot) {
            slot = c.z();
            out.pixels.assign(px->u, px->v, i);
        }
    }
    if (out.depth.valid_count() == 0)
        fail(ErrorCode::EmptyRender, "render_depth: every point was culled (check the initial pose or intrinsics)");
    return out;
}

namespace {

DepthMap close_once(const DepthMap& d, int kernel) {
    const int r = kernel / 2;
    const int w = d.width(), h = d.height();

    std::vector<double> fill(static_cast<std::size_t>(w) * h, 0.0);
    std::vector<char> dilated(static_cast<std::size_t>(w) * h, 0);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const auto i = static_cast<std::size_t>(v) * w + u;
            if (d.valid(u, v)) {
                dilated[i] = 1;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            for (int dv = -r; dv <= r; ++dv)
                for (int du = -r; du <= r; ++du) {
                    const int uu = u + du, vv = v + dv;
                    if (d.in_bounds(uu, vv) && d.valid(uu, vv)) best = std::min(best, d.at(uu, vv));
                }
            if (std::isfinite(best)) {
                dilated[i] = 1;
                fill[i] = best;
            }
        }
    }

    DepthMap out = d;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (d.valid(u, v)) continue;
            const auto i = static_cast<std::size_t>(v) * w + u;
            if (!dilated[i]) continue;
            bool keep = true;
            for (int dv = -r; dv <= r && keep; ++dv)
                for (int du = -r; du <= r && keep; ++du) {
                    const int uu = u + du, vv = v + dv;
                    if (d.in_bounds(uu, vv) && !dilated[static_cast<std::size_t>(vv) * w + uu]) keep = false;
                }
            if (keep) out.at(u, v) = fill[i];
        }
    }
    return out;
}

}  // namespace

DepthMap densify_depth(const DepthMap& d, int kernel, int passes) {
    if (kernel < 1 || kernel % 2 == 0) fail(ErrorCode::InvalidInput, "densify_depth: kernel must be odd and >= 1");
    if (passes < 0) fail(ErrorCode::InvalidInput, "densify_depth: passes must be >= 0");
    DepthMap out = d;
    if (kernel == 1) return out;
    for (int p = 0; p < passes; ++p) out = close_once(out, kernel);
    return out;
}

std::vector<Vec3> backproject(const DepthMap& d) {
    std::vector<Vec3> out;
    for (int v = 0; v < d.height(); ++v)
        for (int u = 0; u < d.width(); ++u)
            if (d.valid(u, v)) out.push_back(backproject_pixel(d.intrinsics(), u, v, d.at(u, v)));
    return out;
}

BackprojectedPixels backproject_to_world(const DepthMap& d) {
    const RigidTransform to_world = invert(d.view_pose());
    BackprojectedPixels out;
    for (int v = 0; v < d.height(); ++v)
        for (int u = 0; u < d.width(); ++u)
            if (d.valid(u, v)) {
                out.points.push_back(to_world.apply(backproject_pixel(d.intrinsics(), u, v, d.at(u, v))));
                out.pixels.push_back(static_cast<std::uint32_t>(v * d.width() + u));
            }
    return out;
}

ViewPairs make_view_pairs(const PointCloud& ref, const PointCloud& src, const RigidTransform& t_init,
                          const CameraIntrinsics& k) {
    if (ref.empty() || src.empty()) fail(ErrorCode::InvalidInput, "make_view_pairs: empty cloud");
    const RigidTransform ref_pose = auto_frame(ref.points, k);
    const RigidTransform src_pose = auto_frame(src.points, k);
    const auto src_in_ref = apply_transform(t_init, src.points);
    const auto ref_in_src = apply_transform(invert(t_init), ref.points);
    return ViewPairs{
        render_depth(ref.points, ref_pose, k),
        render_depth(src_in_ref, ref_pose, k),
        render_depth(ref_in_src, src_pose, k),
        render_depth(src.points, src_pose, k),
    };
}

}  // namespace difreg
