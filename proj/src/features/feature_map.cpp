#include "difreg/features/feature_map.hpp"

#include <cmath>

#include "difreg/core/error.hpp"

namespace difreg {

FeatureMap::FeatureMap(int h, int w, int c, int layer, int src_h, int src_w)
    : height(h), width(w), channels(c), layer_id(layer), source_height(src_h), source_width(src_w) {
    if (h <= 0 || w <= 0 || c <= 0) fail(ErrorCode::InvalidInput, "feature map dimensions must be positive");
    data.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(c), 0.0f);
}

void FeatureMap::validate() const {
    if (height <= 0 || width <= 0 || channels < 1)
        fail(ErrorCode::InvalidInput, "feature map dimensions must be positive");
    if (data.size() != pixel_count() * static_cast<std::size_t>(channels))
        fail(ErrorCode::InvalidInput, "feature map payload size mismatch");
    for (float v : data)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidInput, "feature map has non-finite values");
}

void PointFeatures::push_back(std::size_t point_id, std::span<const double> v, bool is_featureless) {
    point_ids.push_back(point_id);
    vectors.append_row(v);
    featureless.push_back(is_featureless ? 1 : 0);
}

PointFeatures keypoint_descriptors(const PointCloud& cloud) {
    PointFeatures out;
    out.point_ids = cloud.keypoint_indices;
    out.vectors = cloud.descriptors;
    out.featureless.assign(out.point_ids.size(), 0);
    return out;
}

}  // namespace difreg
