#include "difreg/core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "difreg/core/error.hpp"

namespace difreg {

double rotation_error(const RigidTransform& est, const RigidTransform& gt) {
    const Mat3 m = gt.rotation().transpose() * est.rotation();
    const Vec3 axis(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    return std::atan2(axis.norm() / 2.0, (m.trace() - 1.0) / 2.0) * 180.0 / std::numbers::pi;
}

double translation_error(const RigidTransform& est, const RigidTransform& gt) {
    return (est.translation() - gt.translation()).norm();
}

bool is_registered(const EstimatePair& pair, const RecallThresholds& th) {
    return rotation_error(pair.first, pair.second) <= th.rotation_deg &&
           translation_error(pair.first, pair.second) <= th.translation_m;
}

double registration_recall(std::span<const EstimatePair> results, const RecallThresholds& th) {
    if (results.empty()) fail(ErrorCode::InvalidInput, "registration_recall: empty result list");
    if (!(th.rotation_deg > 0.0) || !(th.translation_m > 0.0))
        fail(ErrorCode::InvalidInput, "registration_recall: thresholds must be positive");
    const auto ok = std::count_if(results.begin(), results.end(),
                                  [&](const EstimatePair& p) { return is_registered(p, th); });
    return static_cast<double>(ok) / static_cast<double>(results.size());
}

}  // namespace difreg
