#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "difreg/projection/camera.hpp"

namespace difreg {

inline constexpr double kDepthMin = 0.01;    // metres; points at or nearer are culled
inline constexpr double kDepthMax = 65.535;  // largest value a 16-bit millimetre PNG holds

struct Pixel {
    int u = 0;  // column
    int v = 0;  // row
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// H×W grid of z-depths in metres, 0 = invalid, with the camera it was rendered from.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(const CameraIntrinsics& k, const RigidTransform& view_pose);

    int width() const noexcept { return intrinsics_.width; }
    int height() const noexcept { return intrinsics_.height; }
    const CameraIntrinsics& intrinsics() const noexcept { return intrinsics_; }
    /// World (cloud frame) to camera.
    const RigidTransform& view_pose() const noexcept { return view_pose_; }

    double at(int u, int v) const { return depth_[index(u, v)]; }
    double& at(int u, int v) { return depth_[index(u, v)]; }
    bool valid(int u, int v) const { return at(u, v) > 0.0; }
    bool in_bounds(int u, int v) const noexcept { return u >= 0 && v >= 0 && u < width() && v < height(); }

    std::size_t valid_count() const noexcept;
    const std::vector<double>& data() const noexcept { return depth_; }

    friend bool operator==(const DepthMap& a, const DepthMap& b) { return a.depth_ == b.depth_; }

private:
    std::size_t index(int u, int v) const noexcept {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(intrinsics_.width) + static_cast<std::size_t>(u);
    }

    CameraIntrinsics intrinsics_{};
    RigidTransform view_pose_{};
    std::vector<double> depth_;
};

/// Pixel <-> point association produced by the z-buffer.
class PixelPointMap {
public:
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    PixelPointMap() = default;
    PixelPointMap(int width, int height, std::size_t point_count);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t point_count() const noexcept { return point_to_pixel_.size(); }

    std::uint32_t point_at(int u, int v) const { return pixel_to_point_[idx(u, v)]; }
    /// Winning pixel of point i, or kNone when culled/occluded.
    std::uint32_t pixel_of(std::size_t point) const { return point_to_pixel_[point]; }
    bool visible(std::size_t point) const { return point_to_pixel_[point] != kNone; }
    Pixel pixel_coords(std::uint32_t linear) const {
        return {static_cast<int>(linear % static_cast<std::uint32_t>(width_)),
                static_cast<int>(linear / static_cast<std::uint32_t>(width_))};
    }

    void assign(int u, int v, std::size_t point);
    std::vector<std::size_t> visible_points() const;

private:
    std::size_t idx(int u, int v) const noexcept {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint32_t> pixel_to_point_;
    std::vector<std::uint32_t> point_to_pixel_;
};

}  // namespace difreg
