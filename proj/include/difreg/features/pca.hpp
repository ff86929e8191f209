#pragma once

#include <span>
#include <vector>

#include "difreg/features/feature_map.hpp"

namespace difreg {

/// Principal axes of a pixel population, sorted by descending variance.
struct PcaBasis {
    std::vector<double> mean;                // C
    std::vector<std::vector<double>> axes;   // out_dim rows of length C; zero rows past the rank
    std::vector<double> variances;           // eigenvalue per retained axis
    std::vector<double> all_variances;       // full descending spectrum (length min(C, N))
    std::size_t rank = 0;

    double explained_fraction() const;
};

/// Fits on the pooled pixels of `maps` (all must share C). Each axis has its largest-magnitude
/// loading positive. Axes past the numerical rank are zero and a warning is logged.
PcaBasis fit_pca(std::span<const FeatureMap* const> maps, int out_dim);

FeatureMap project_pca(const FeatureMap& fm, const PcaBasis& basis);

/// Zero-shot reduction on this map's own pixels.
FeatureMap pca_reduce(const FeatureMap& fm, int out_dim);

/// One basis shared by every map, so reduced features stay comparable across maps.
std::vector<FeatureMap> pca_reduce_joint(std::span<const FeatureMap> maps, int out_dim);

}  // namespace difreg
