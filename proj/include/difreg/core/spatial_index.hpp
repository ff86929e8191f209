#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "difreg/core/types.hpp"

namespace difreg {

struct NearestNeighbor {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    double distance = std::numeric_limits<double>::infinity();
};

/// Exact Euclidean nearest-neighbour search over a fixed point set (k-d tree with
/// bucketed leaves). Ties resolve to the lowest point index. Immutable after
/// construction, so concurrent queries are safe.
class SpatialIndex {
public:
    /// Throws InvalidInput on an empty or non-finite set.
    explicit SpatialIndex(std::span<const Vec3> points);

    NearestNeighbor nearest(const Vec3& query) const;
    std::size_t size() const noexcept { return xs_.size(); }

private:
    struct Node {
        // Leaf when axis < 0: covers [begin, end) of the permuted SoA arrays.
        int axis = -1;
        double split = 0.0;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<std::uint32_t>& order,
                        std::span<const Vec3> points);
    void search(std::uint32_t node, const Vec3& q, double& best_sq, std::size_t& best_idx,
                std::vector<double>& scratch) const;

    std::vector<Node> nodes_;
    // Points permuted into leaf order, stored structure-of-arrays for the distance kernel.
    std::vector<double> xs_, ys_, zs_;
    std::vector<std::size_t> ids_;
};

/// Reference linear scan (same tie-break).
NearestNeighbor brute_force_nearest(std::span<const Vec3> points, const Vec3& query);

}  // namespace difreg
