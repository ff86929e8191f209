#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "difreg/core/transform.hpp"

namespace difreg {

/// Matched 3D pairs (source point, reference point) with weights, structure-of-arrays.
class PointPairs {
public:
    void reserve(std::size_t n);
    void push_back(const Vec3& src, const Vec3& ref, double weight);

    std::size_t size() const noexcept { return weights_.size(); }
    bool empty() const noexcept { return weights_.empty(); }

    Vec3 src(std::size_t i) const { return {sx_[i], sy_[i], sz_[i]}; }
    Vec3 ref(std::size_t i) const { return {rx_[i], ry_[i], rz_[i]}; }
    double weight(std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Same geometry, different weights.
    PointPairs with_weights(std::span<const double> w) const;
    PointPairs subset(std::span<const std::size_t> rows) const;

    /// ‖R·src_i + t − ref_i‖² for every pair (SIMD kernel).
    std::vector<double> squared_residuals(const RigidTransform& t) const;

private:
    std::vector<double> sx_, sy_, sz_, rx_, ry_, rz_;
    std::vector<double> weights_;
};

PointPairs gather_pairs(const CorrespondenceSet& set, const PointCloud& ref, const PointCloud& src);

/// Closed-form minimiser of Σ w‖R·src + t − ref‖² (weighted Kabsch with reflection
/// correction). Throws Estimation for fewer than 3 positively weighted pairs, zero total
/// weight or a collinear/coincident configuration.
RigidTransform weighted_svd(const PointPairs& pairs);

/// Σ w‖R·src + t − ref‖².
double weighted_objective(const RigidTransform& t, const PointPairs& pairs);

/// Pairs with ‖R·src + t − ref‖ strictly below tau.
std::size_t count_inliers(const RigidTransform& t, const PointPairs& pairs, double tau);

}  // namespace difreg
