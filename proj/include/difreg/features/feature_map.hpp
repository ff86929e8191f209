#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "difreg/core/types.hpp"

namespace difreg {

/// Dense H×W×C activation grid, row-major H→W→C.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    int layer_id = 0;
    // Resolution of the depth raster these features were computed from.
    int source_height = 0;
    int source_width = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(int h, int w, int c, int layer = 0, int src_h = 0, int src_w = 0);

    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
    std::span<float> pixel(int y, int x) { return {data.data() + offset(y, x), static_cast<std::size_t>(channels)}; }
    std::span<const float> pixel(int y, int x) const {
        return {data.data() + offset(y, x), static_cast<std::size_t>(channels)};
    }
    float at(int y, int x, int c) const { return data[offset(y, x) + static_cast<std::size_t>(c)]; }

    /// C >= 1, data size H·W·C, all values finite. Throws InvalidInput.
    void validate() const;

private:
    std::size_t offset(int y, int x) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels);
    }
};

/// One feature vector per point, identified by index into the owning cloud.
struct PointFeatures {
    std::vector<std::size_t> point_ids;
    FeatureMatrix vectors;
    // Set for points whose vector could not be normalised; skipped by matching.
    std::vector<std::uint8_t> featureless;

    std::size_t size() const noexcept { return point_ids.size(); }
    std::size_t dim() const noexcept { return vectors.dim(); }
    bool empty() const noexcept { return point_ids.empty(); }

    void push_back(std::size_t point_id, std::span<const double> v, bool is_featureless = false);
};

/// Geometric descriptors of a cloud's keypoints as PointFeatures.
PointFeatures keypoint_descriptors(const PointCloud& cloud);

}  // namespace difreg
