#include "difreg/core/types.hpp"

#include <cmath>
#include <string>

#include "difreg/core/error.hpp"

namespace difreg {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
    if (data_.size() != rows_ * dim_)
        fail(ErrorCode::InvalidInput, "feature matrix data size does not match rows*dim");
}

void FeatureMatrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && dim_ == 0) dim_ = values.size();
    if (values.size() != dim_) fail(ErrorCode::InvalidInput, "feature row dimension mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

bool all_finite(std::span<const Vec3> pts) noexcept {
    for (const auto& p : pts)
        if (!p.allFinite()) return false;
    return true;
}

void PointCloud::validate() const {
    if (!all_finite(points)) fail(ErrorCode::InvalidInput, "point cloud has non-finite coordinates");
    for (auto k : keypoint_indices)
        if (k >= points.size())
            fail(ErrorCode::InvalidInput, "keypoint index " + std::to_string(k) + " out of range");
    if (descriptors.rows() != keypoint_indices.size())
        fail(ErrorCode::InvalidInput, "descriptor count " + std::to_string(descriptors.rows()) +
                                          " != keypoint count " + std::to_string(keypoint_indices.size()));
    for (double v : descriptors.data())
        if (!std::isfinite(v)) fail(ErrorCode::InvalidInput, "non-finite descriptor value");
}

std::vector<Vec3> PointCloud::keypoints() const {
    std::vector<Vec3> out;
    out.reserve(keypoint_indices.size());
    for (auto k : keypoint_indices) out.push_back(points[k]);
    return out;
}

void CorrespondenceSet::validate() const {
    for (const auto& c : pairs)
        if (!std::isfinite(c.weight) || c.weight < 0.0)
            fail(ErrorCode::InvalidInput, "correspondence weight must be finite and non-negative");
}

}  // namespace difreg
