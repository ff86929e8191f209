#pragma once

#include <span>
#include <utility>

#include "difreg/core/transform.hpp"

namespace difreg {

/// Geodesic angle between the two rotations, degrees in [0, 180].
double rotation_error(const RigidTransform& est, const RigidTransform& gt);

/// ‖t_est − t_gt‖₂ in metres.
double translation_error(const RigidTransform& est, const RigidTransform& gt);

struct RecallThresholds {
    double rotation_deg = 15.0;
    double translation_m = 0.30;

    static RecallThresholds indoor() { return {15.0, 0.30}; }
    static RecallThresholds outdoor() { return {5.0, 0.60}; }

    friend bool operator==(const RecallThresholds&, const RecallThresholds&) = default;
};

using EstimatePair = std::pair<RigidTransform, RigidTransform>;  // (estimate, ground truth)

bool is_registered(const EstimatePair& pair, const RecallThresholds& th);

/// Fraction of pairs with RE <= rotation_deg and TE <= translation_m.
/// Throws InvalidInput for an empty list or non-positive thresholds.
double registration_recall(std::span<const EstimatePair> results, const RecallThresholds& th);

}  // namespace difreg
