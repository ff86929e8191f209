#include "difreg/aggregation/weighted_svd.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "difreg/core/error.hpp"
#include "difreg/simd/kernels.hpp"

namespace difreg {

void PointPairs::reserve(std::size_t n) {
    for (auto* v : {&sx_, &sy_, &sz_, &rx_, &ry_, &rz_, &weights_}) v->reserve(n);
}

void PointPairs::push_back(const Vec3& src, const Vec3& ref, double weight) {
    sx_.push_back(src.x());
    sy_.push_back(src.y());
    sz_.push_back(src.z());
    rx_.push_back(ref.x());
    ry_.push_back(ref.y());
    rz_.push_back(ref.z());
    weights_.push_back(weight);
}

PointPairs PointPairs::with_weights(std::span<const double> w) const {
    if (w.size() != size()) fail(ErrorCode::InvalidInput, "with_weights: length mismatch");
    PointPairs out = *this;
    out.weights_.assign(w.begin(), w.end());
    return out;
}

PointPairs PointPairs::subset(std::span<const std::size_t> rows) const {
    PointPairs out;
    out.reserve(rows.size());
    for (auto i : rows) out.push_back(src(i), ref(i), weights_[i]);
    return out;
}

std::vector<double> PointPairs::squared_residuals(const RigidTransform& t) const {
    std::vector<double> out(size());
    if (empty()) return out;
    // Row-major copy of R for the kernel.
    double r[9];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[3 * i + j] = t.rotation()(i, j);
    const double tr[3] = {t.translation().x(), t.translation().y(), t.translation().z()};
    simd::active().transformed_residuals_sq(r, tr, sx_.data(), sy_.data(), sz_.data(), rx_.data(), ry_.data(),
                                            rz_.data(), size(), out.data());
    return out;
}

PointPairs gather_pairs(const CorrespondenceSet& set, const PointCloud& ref, const PointCloud& src) {
    PointPairs out;
    out.reserve(set.size());
    for (const auto& c : set.pairs) {
        if (c.ref >= ref.size() || c.src >= src.size())
            fail(ErrorCode::InvalidInput, "correspondence index out of range in set '" + set.label + "'");
        out.push_back(src.points[c.src], ref.points[c.ref], c.weight);
    }
    return out;
}

RigidTransform weighted_svd(const PointPairs& pairs) {
    std::size_t positive = 0;
    double total = 0.0;
    for (double w : pairs.weights()) {
        if (!std::isfinite(w) || w < 0.0) fail(ErrorCode::InvalidInput, "weighted_svd: weights must be finite and >= 0");
        if (w > 0.0) ++positive;
        total += w;
    }
    if (positive < 3)
        fail(ErrorCode::Estimation, "weighted_svd: need at least 3 positively weighted pairs, got " + std::to_string(positive));
    if (!(total > 0.0)) fail(ErrorCode::Estimation, "weighted_svd: total weight is zero");

    Vec3 cs = Vec3::Zero(), cr = Vec3::Zero();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        cs += pairs.weight(i) * pairs.src(i);
        cr += pairs.weight(i) * pairs.ref(i);
    }
    cs /= total;
    cr /= total;

    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double w = pairs.weight(i);
        if (w == 0.0) continue;
        h += w * (pairs.src(i) - cs) * (pairs.ref(i) - cr).transpose();
    }

    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 s = svd.singularValues();
    if (!(s(0) > 0.0)) fail(ErrorCode::Estimation, "weighted_svd: all weighted points coincide");
    if (s(1) <= 1e-12 * s(0)) fail(ErrorCode::Estimation, "weighted_svd: correspondences are collinear");

    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    Mat3 d = Mat3::Identity();
    if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    Mat3 r = v * d * u.transpose();
    if (orthonormality_drift(r) > RigidTransform::kTolerance) r = project_to_rotation(r);
    return {r, cr - r * cs};
}

double weighted_objective(const RigidTransform& t, const PointPairs& pairs) {
    const auto r2 = pairs.squared_residuals(t);
    double s = 0.0;
    for (std::size_t i = 0; i < r2.size(); ++i) s += pairs.weight(i) * r2[i];
    return s;
}

std::size_t count_inliers(const RigidTransform& t, const PointPairs& pairs, double tau) {
    if (!(tau > 0.0)) fail(ErrorCode::InvalidInput, "count_inliers: tau must be positive");
    std::size_t n = 0;
    for (double r2 : pairs.squared_residuals(t))
        if (std::sqrt(r2) < tau) ++n;
    return n;
}

}  // namespace difreg
