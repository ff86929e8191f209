#include "difreg/core/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "difreg/core/error.hpp"
#include "difreg/simd/kernels.hpp"

namespace difreg {
namespace {

constexpr std::uint32_t kLeafSize = 16;

inline bool better(double d, std::size_t id, double best, std::size_t best_id) {
    return d < best || (d == best && id < best_id);
}

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Vec3> points) {
    if (points.empty()) fail(ErrorCode::InvalidInput, "spatial index over an empty point set");
    if (!all_finite(points)) fail(ErrorCode::InvalidInput, "spatial index over non-finite points");
    if (points.size() >= std::numeric_limits<std::uint32_t>::max())
        fail(ErrorCode::InvalidInput, "spatial index: too many points");

    std::vector<std::uint32_t> order(points.size());
    std::iota(order.begin(), order.end(), 0u);
    nodes_.reserve(2 * points.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points.size()), order, points);

    xs_.resize(points.size());
    ys_.resize(points.size());
    zs_.resize(points.size());
    ids_.resize(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& p = points[order[i]];
        xs_[i] = p.x();
        ys_[i] = p.y();
        zs_[i] = p.z();
        ids_[i] = order[i];
    }
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end,
                                  std::vector<std::uint32_t>& order, std::span<const Vec3> points) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    Vec3 lo = points[order[begin]], hi = lo;
    for (auto i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points[order[i]]);
        hi = hi.cwiseMax(points[order[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points[a][axis] < points[b][axis]; });
    const double split = points[order[mid]][axis];

    const auto left = build(begin, mid, order, points);
    const auto right = build(mid, end, order, points);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void SpatialIndex::search(std::uint32_t node_id, const Vec3& q, double& best_sq, std::size_t& best_idx,
                          std::vector<double>& scratch) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        const std::size_t n = node.end - node.begin;
        simd::active().squared_distances(xs_.data() + node.begin, ys_.data() + node.begin,
                                         zs_.data() + node.begin, n, q.x(), q.y(), q.z(), scratch.data());
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t id = ids_[node.begin + i];
            if (better(scratch[i], id, best_sq, best_idx)) {
                best_sq = scratch[i];
                best_idx = id;
            }
        }
        return;
    }
    // Left holds coordinates <= split, right >= split.
    const double diff = q[node.axis] - node.split;
    const auto near = diff <= 0.0 ? node.left : node.right;
    const auto far = diff <= 0.0 ? node.right : node.left;
    search(near, q, best_sq, best_idx, scratch);
    if (diff * diff <= best_sq) search(far, q, best_sq, best_idx, scratch);
}

NearestNeighbor SpatialIndex::nearest(const Vec3& query) const {
    double best_sq = std::numeric_limits<double>::infinity();
    std::size_t best_idx = std::numeric_limits<std::size_t>::max();
    std::vector<double> scratch(kLeafSize);
    search(0, query, best_sq, best_idx, scratch);
    return {best_idx, std::sqrt(best_sq)};
}

NearestNeighbor brute_force_nearest(std::span<const Vec3> points, const Vec3& query) {
    NearestNeighbor best;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points[i] - query).squaredNorm();
        if (better(d, i, best_sq, best.index)) {
            best_sq = d;
            best.index = i;
        }
    }
    best.distance = std::sqrt(best_sq);
    return best;
}

}  // namespace difreg
