#include "difreg/pipeline/sampling.hpp"

#include <limits>
#include <numeric>

#include "difreg/core/error.hpp"

namespace difreg {

std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t count, std::size_t start) {
    if (points.empty()) return {};
    if (start >= points.size()) fail(ErrorCode::InvalidInput, "farthest_point_sampling: start index out of range");
    if (count >= points.size()) {
        std::vector<std::size_t> all(points.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    std::vector<std::size_t> picked{start};
    picked.reserve(count);
    std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
    std::size_t last = start;
    while (picked.size() < count) {
        std::size_t next = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double d = (points[i] - points[last]).squaredNorm();
            if (d < dist[i]) dist[i] = d;
            if (dist[i] > best) {
                best = dist[i];
                next = i;
            }
        }
        picked.push_back(next);
        last = next;
    }
    return picked;
}

}  // namespace difreg
