#include "difreg/pipeline/views.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "difreg/core/error.hpp"
#include "difreg/projection/depth_png.hpp"

namespace difreg {

std::array<PreparedView, 4> prepare_views(const PointCloud& ref, const PointCloud& src, const RigidTransform& t_init,
                                          const PipelineConfig& cfg, const std::string& pair_id) {
    ViewPairs vp = make_view_pairs(ref, src, t_init, cfg.intrinsics);
    auto make = [&](RenderedView&& r, ViewSide view, CloudSide cloud) {
        PreparedView p;
        p.depth_id = pair_id + "." + std::string(to_string(view)) + "." + std::string(to_string(cloud));
        p.view = view;
        p.cloud = cloud;
        p.dense = densify_depth(r.depth, cfg.densify_kernel, cfg.densify_passes);
        p.render = std::move(r);
        return p;
    };
    return {make(std::move(vp.ref_p), ViewSide::Ref, CloudSide::P), make(std::move(vp.ref_q), ViewSide::Ref, CloudSide::Q),
            make(std::move(vp.src_p), ViewSide::Src, CloudSide::P), make(std::move(vp.src_q), ViewSide::Src, CloudSide::Q)};
}

std::vector<DepthExport> export_depth_maps(const std::array<PreparedView, 4>& views, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
    std::vector<DepthExport> out;
    for (const auto& v : views) {
        DepthExport e{v.depth_id, dir / (v.depth_id + ".png"), dir / (v.depth_id + ".json")};
        write_depth_png(e.png, quantize_mm(v.dense));

        const auto& k = v.dense.intrinsics();
        const Mat4 pose = v.dense.view_pose().matrix();
        nlohmann::ordered_json meta;
        meta["depth_id"] = v.depth_id;
        meta["width"] = k.width;
        meta["height"] = k.height;
        meta["unit"] = "mm";
        meta["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
        auto& rows = meta["view_pose"] = nlohmann::ordered_json::array();
        for (int r = 0; r < 4; ++r) rows.push_back({pose(r, 0), pose(r, 1), pose(r, 2), pose(r, 3)});
        std::ofstream f(e.metadata, std::ios::trunc);
        if (!f) fail(ErrorCode::Io, "cannot open for writing: " + e.metadata.string());
        f << meta.dump(2) << "\n";
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace difreg
