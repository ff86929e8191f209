#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "difreg/features/feature_map.hpp"
#include "difreg/projection/depth_map.hpp"

namespace difreg {

/// Corner-aligned channelwise bilinear resize; requires h >= H and w >= W.
FeatureMap upsample_bilinear(const FeatureMap& fm, int h, int w);

enum class PcaFit { JointPerPair, PerMap };

/// Per-layer PCA, upsampling to the largest layer size and channel concatenation in
/// ascending layer order. `images[i]` lists the layer maps computed from depth image i;
/// with JointPerPair one basis per layer is fitted on all images together.
std::vector<FeatureMap> aggregate_layers_joint(std::span<const std::vector<FeatureMap>> images, int out_dim,
                                               PcaFit fit = PcaFit::JointPerPair);
FeatureMap aggregate_layers(std::span<const FeatureMap> maps, int out_dim);

/// Bilinear sample at a depth-raster pixel, mapped by pixel centres onto the feature grid.
std::vector<double> sample_at_pixel(const FeatureMap& fm, int depth_height, int depth_width, Pixel px);

/// Features of every visible point (or the visible subset of `candidates`).
PointFeatures sample_point_features(const FeatureMap& fm, const PixelPointMap& ppm, int depth_height,
                                    int depth_width);
PointFeatures sample_point_features(const FeatureMap& fm, const PixelPointMap& ppm, int depth_height,
                                    int depth_width, std::span<const std::size_t> candidates);

/// Concat(v/‖v‖₂, view/‖view‖₂) per point; zero halves stay zero and mark the point featureless.
PointFeatures fuse_features(const PointFeatures& geo, const PointFeatures& diff);

/// In-place L2 normalisation; returns false (leaving zeros) for a zero vector.
bool l2_normalize(std::span<double> v);

}  // namespace difreg
