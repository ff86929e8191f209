#pragma once

#include <cstdint>

#include "difreg/aggregation/weighted_svd.hpp"

namespace difreg {

struct RansacConfig {
    double tau = 0.10;
    int iterations = 1000;
    std::uint64_t seed = 0;
};

struct RansacResult {
    RigidTransform transform;
    std::size_t inliers = 0;
    bool found = false;  // false when no minimal sample was solvable
};

/// Plain 3-point RANSAC over matched pairs with a final unweighted refit on the inliers.
/// A comparison baseline only; the refinement pipeline never calls it.
RansacResult ransac_registration(const PointPairs& pairs, const RansacConfig& cfg);

}  // namespace difreg
