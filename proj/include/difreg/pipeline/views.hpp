#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "difreg/pipeline/config.hpp"
#include "difreg/projection/render.hpp"

namespace difreg {

/// A rendered cloud, its densified depth and the identifier providers key features by.
struct PreparedView {
    std::string depth_id;  // "<pair_id>.<view>.<cloud>"
    ViewSide view = ViewSide::Ref;
    CloudSide cloud = CloudSide::P;
    RenderedView render;
    DepthMap dense;
};

/// Order: ref.p, ref.q, src.p, src.q.
std::array<PreparedView, 4> prepare_views(const PointCloud& ref, const PointCloud& src, const RigidTransform& t_init,
                                          const PipelineConfig& cfg, const std::string& pair_id);

struct DepthExport {
    std::string depth_id;
    std::filesystem::path png;
    std::filesystem::path metadata;
};

/// Writes `<depth_id>.png` (16-bit millimetres) and `<depth_id>.json` (intrinsics, view pose,
/// unit) for every view, the hand-off consumed by the external feature extractor.
std::vector<DepthExport> export_depth_maps(const std::array<PreparedView, 4>& views, const std::filesystem::path& dir);

}  // namespace difreg
