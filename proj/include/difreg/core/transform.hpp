#pragma once

#include <span>
#include <vector>

#include "difreg/core/types.hpp"

namespace difreg {

/// Proper rigid motion x -> R·x + t. Construction validates orthonormality and det(R) = +1.
class RigidTransform {
public:
    static constexpr double kTolerance = 1e-9;

    RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
    RigidTransform(const Mat3& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }

    /// Accepts a rotation with drift up to `max_drift`, projecting it back onto SO(3).
    static RigidTransform from_approximate(const Mat3& rotation, const Vec3& translation,
                                           double max_drift);
    /// Rejects anything but a rigid 4×4 with bottom row 0 0 0 1 (within 1e-6).
    static RigidTransform from_matrix(const Mat4& m, double max_drift = 1e-4);

    const Mat3& rotation() const noexcept { return rotation_; }
    const Vec3& translation() const noexcept { return translation_; }
    Mat4 matrix() const;

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

private:
    Mat3 rotation_;
    Vec3 translation_;
};

/// Deviation of R from orthonormality: max(|RᵀR − I|_max, |det R − 1|).
double orthonormality_drift(const Mat3& r) noexcept;

/// Nearest rotation in Frobenius norm (SVD projection with det correction).
Mat3 project_to_rotation(const Mat3& m);

/// Rotation by `angle_rad` about `axis` (need not be normalised, must be non-zero).
Mat3 axis_angle(const Vec3& axis, double angle_rad);

/// Throws InvalidInput if any point is non-finite.
std::vector<Vec3> apply_transform(const RigidTransform& t, std::span<const Vec3> pts);

/// apply(compose(a, b), p) == apply(a, apply(b, p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

}  // namespace difreg
