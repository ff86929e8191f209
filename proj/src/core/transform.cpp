#include "difreg/core/transform.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>

#include "difreg/core/error.hpp"

namespace difreg {

double orthonormality_drift(const Mat3& r) noexcept {
    const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    return std::max(ortho, std::abs(r.determinant() - 1.0));
}

Mat3 project_to_rotation(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    return svd.matrixU() * d * svd.matrixV().transpose();
}

Mat3 axis_angle(const Vec3& axis, double angle_rad) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorCode::InvalidInput, "rotation axis must be non-zero");
    return Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix();
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    if (!rotation.allFinite() || !translation.allFinite())
        fail(ErrorCode::InvalidInput, "rigid transform has non-finite entries");
    if (orthonormality_drift(rotation) > kTolerance)
        fail(ErrorCode::InvalidInput, "rotation is not orthonormal with det +1");
}

RigidTransform RigidTransform::from_approximate(const Mat3& rotation, const Vec3& translation,
                                                double max_drift) {
    if (!rotation.allFinite() || !translation.allFinite())
        fail(ErrorCode::InvalidInput, "rigid transform has non-finite entries");
    const double drift = orthonormality_drift(rotation);
    if (drift > max_drift) fail(ErrorCode::InvalidInput, "matrix is not a rigid rotation");
    if (drift <= kTolerance) return {rotation, translation};
    return {project_to_rotation(rotation), translation};
}

RigidTransform RigidTransform::from_matrix(const Mat4& m, double max_drift) {
    if (!m.allFinite()) fail(ErrorCode::InvalidInput, "pose matrix has non-finite entries");
    const Eigen::RowVector4d bottom = m.row(3);
    if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-6)
        fail(ErrorCode::InvalidInput, "pose matrix bottom row must be 0 0 0 1");
    return from_approximate(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>(), max_drift);
}

Mat4 RigidTransform::matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
}

std::vector<Vec3> apply_transform(const RigidTransform& t, std::span<const Vec3> pts) {
    std::vector<Vec3> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        if (!p.allFinite()) fail(ErrorCode::InvalidInput, "apply_transform: non-finite input point");
        out.push_back(t.apply(p));
    }
    return out;
}

namespace {

// Products of rotations drift slowly; snap back once the drift is measurable.
RigidTransform make_clean(const Mat3& r, const Vec3& t) {
    if (orthonormality_drift(r) > RigidTransform::kTolerance) return {project_to_rotation(r), t};
    return {r, t};
}

}  // namespace

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return make_clean(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

RigidTransform invert(const RigidTransform& t) {
    const Mat3 rt = t.rotation().transpose();
    return make_clean(rt, -(rt * t.translation()));
}

}  // namespace difreg
