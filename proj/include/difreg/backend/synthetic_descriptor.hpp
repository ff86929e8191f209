#pragma once

#include <span>
#include <vector>

#include "difreg/features/feature_map.hpp"
#include "difreg/projection/depth_map.hpp"

namespace difreg {

inline constexpr int kSyntheticChannels = 8;

/// Downsampling factor of a decoder layer: layers 0-2 → 64, 3-5 → 32, 6-8 → 16, 9-12 → 8.
int layer_stride(int layer_id);

/// Grid size of a layer's map for a raster of the given size (ceil division by the stride).
int layer_grid_size(int raster_size, int layer_id);

/// Depth statistics over the (2·stride)² window centred at depth-raster position (cu, cv):
/// mean, std, min, max of valid depths, then a 4-bin orientation histogram of metric depth
/// slope (magnitude-weighted, per valid pixel). All zero when the window has no valid pixel.
std::vector<float> synthetic_descriptor_at(const DepthMap& d, int layer_id, double cu, double cv);

/// GPU-free, deterministic stand-in for decoder features: one map per layer, each cell
/// evaluated at its pixel-centre position on the depth raster.
std::vector<FeatureMap> synthetic_descriptor(const DepthMap& d, std::span<const int> layers);

}  // namespace difreg
