#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace difreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Row-major table of feature vectors (double precision), one row per item.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {}
    FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    void append_row(std::span<const double> values);

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// 3D points plus sampled keypoints and one geometric descriptor per keypoint.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<std::size_t> keypoint_indices;
    FeatureMatrix descriptors;  // rows == keypoint_indices.size()

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }

    /// Throws InvalidInput on out-of-range keypoints, descriptor/keypoint count
    /// mismatch or non-finite coordinates.
    void validate() const;

    std::vector<Vec3> keypoints() const;
};

/// One hypothesised match: `ref` indexes the reference cloud's points, `src` the source cloud's.
struct Correspondence {
    std::size_t ref = 0;
    std::size_t src = 0;
    double weight = 1.0;

    friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

struct CorrespondenceSet {
    std::string label;
    std::vector<Correspondence> pairs;
    /// Set when the inputs needed to build this set were absent (degraded mode).
    bool absent = false;

    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }
    void validate() const;
};

bool all_finite(std::span<const Vec3> pts) noexcept;

}  // namespace difreg
