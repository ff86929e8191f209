#include "difreg/aggregation/ransac.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "difreg/core/error.hpp"
#include "difreg/core/random.hpp"

namespace difreg {

RansacResult ransac_registration(const PointPairs& pairs, const RansacConfig& cfg) {
    if (!(cfg.tau > 0.0) || cfg.iterations < 1) fail(ErrorCode::InvalidInput, "ransac: tau and iterations must be positive");
    RansacResult best;
    if (pairs.size() < 3) return best;

    Rng rng(cfg.seed);
    const std::vector<double> ones(3, 1.0);
    for (int it = 0; it < cfg.iterations; ++it) {
        std::array<std::size_t, 3> pick{};
        pick[0] = rng.index(pairs.size());
        do pick[1] = rng.index(pairs.size());
        while (pick[1] == pick[0]);
        do pick[2] = rng.index(pairs.size());
        while (pick[2] == pick[0] || pick[2] == pick[1]);

        RigidTransform t;
        try {
            t = weighted_svd(pairs.subset(pick).with_weights(ones));
        } catch (const Error&) {
            continue;  // degenerate sample
        }
        const std::size_t n = count_inliers(t, pairs, cfg.tau);
        if (!best.found || n > best.inliers) best = {t, n, true};
    }
    if (!best.found || best.inliers < 3) return best;

    const auto r2 = pairs.squared_residuals(best.transform);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < r2.size(); ++i)
        if (std::sqrt(r2[i]) < cfg.tau) rows.push_back(i);
    try {
        const PointPairs in = pairs.subset(rows);
        const RigidTransform refit = weighted_svd(in.with_weights(std::vector<double>(in.size(), 1.0)));
        const std::size_t n = count_inliers(refit, pairs, cfg.tau);
        if (n >= best.inliers) best = {refit, n, true};
    } catch (const Error&) {
    }
    return best;
}

}  // namespace difreg
