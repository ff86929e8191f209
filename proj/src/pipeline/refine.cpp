#include "difreg/pipeline/refine.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "difreg/core/error.hpp"
#include "difreg/core/metrics.hpp"
#include "difreg/core/random.hpp"
#include "difreg/pipeline/exit_codes.hpp"
#include "difreg/pipeline/pose_io.hpp"
#include "difreg/pipeline/sampling.hpp"
#include "difreg/pipeline/views.hpp"

namespace difreg {

using nlohmann::json;
using nlohmann::ordered_json;

CorrespondenceSet load_correspondences(const std::filesystem::path& path, std::size_t ref_size,
                                       std::size_t src_size) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileMissing, "correspondence file not found: " + path.string());
    CorrespondenceSet set;
    set.label = "geo3d";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long r = -1, s = -1;
        double w = 1.0;
        if (!(ls >> r)) continue;
        if (!(ls >> s)) fail(ErrorCode::Parse, path.string() + " line " + std::to_string(line_no) + ": expected 'ref src [weight]'");
        if (!(ls >> w)) w = 1.0;
        if (r < 0 || s < 0 || static_cast<std::size_t>(r) >= ref_size || static_cast<std::size_t>(s) >= src_size)
            fail(ErrorCode::InvalidInput, path.string() + " line " + std::to_string(line_no) + ": index out of range");
        if (!(w >= 0.0 && w <= 1.0))
            fail(ErrorCode::InvalidInput, path.string() + " line " + std::to_string(line_no) + ": weight outside [0, 1]");
        set.pairs.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(s), w});
    }
    return set;
}

PairData load_pair(const PairPaths& paths, const std::string& pair_id) {
    PairData d;
    d.pair_id = pair_id;
    d.paths = paths;
    d.ref = read_ply(paths.ref);
    d.src = read_ply(paths.src);
    d.t_init = load_pose(paths.init);
    if (paths.gt) d.gt = load_pose(*paths.gt);
    if (paths.correspondences)
        d.correspondences = load_correspondences(*paths.correspondences, d.ref.points.size(), d.src.points.size());
    return d;
}

namespace {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>* out) : out_(out), last_(std::chrono::steady_clock::now()) {}
    void mark(const char* stage) {
        const auto now = std::chrono::steady_clock::now();
        if (out_) out_->push_back({stage, std::chrono::duration<double, std::milli>(now - last_).count()});
        last_ = now;
    }

private:
    std::vector<StageTiming>* out_;
    std::chrono::steady_clock::time_point last_;
};

PointCloud with_keypoints(const PlyData& ply, std::size_t count, std::size_t start) {
    PointCloud c;
    c.points = ply.points;
    c.keypoint_indices = farthest_point_sampling(c.points, count, start);
    if (!ply.descriptors.empty()) {
        c.descriptors = FeatureMatrix(0, ply.descriptors.dim());
        for (auto i : c.keypoint_indices) c.descriptors.append_row(ply.descriptors.row(i));
    }
    return c;
}

struct ViewFeatures {
    ViewInputs inputs;
    std::size_t p_common = 0, q_common = 0;
};

// P or Q half of one view: common keypoints plus diffusion features at visible keypoints.
void cloud_view_features(const PreparedView& view, const FeatureMap& fm, const PointCloud& cloud,
                         const std::vector<Vec3>& keypoints_in_view, double thresh, PointFeatures& diffusion,
                         PointFeatures& common_diffusion, std::size_t& common_count) {
    const int h = view.dense.height(), w = view.dense.width();
    diffusion = sample_point_features(fm, view.render.pixels, h, w, cloud.keypoint_indices);

    const auto lifted = backproject_to_world(view.dense);
    common_diffusion = PointFeatures{};
    common_diffusion.vectors = FeatureMatrix(0, static_cast<std::size_t>(fm.channels));
    if (lifted.points.empty()) {
        common_count = 0;
        return;
    }
    const auto common = find_common_points(keypoints_in_view, cloud.keypoint_indices, lifted.points, thresh);
    for (std::size_t i = 0; i < common.size(); ++i) {
        const auto linear = lifted.pixels[common.partners[i]];
        const Pixel px{static_cast<int>(linear % static_cast<std::uint32_t>(w)),
                       static_cast<int>(linear / static_cast<std::uint32_t>(w))};
        common_diffusion.push_back(common.point_ids[i], sample_at_pixel(fm, h, w, px));
    }
    common_count = common.size();
}

ordered_json matrix_json(const RigidTransform& t) {
    const Mat4 m = t.matrix();
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    return rows;
}

RigidTransform matrix_from_json(const ordered_json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) fail(ErrorCode::Parse, where + ": expected a 4x4 array");
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != 4) fail(ErrorCode::Parse, where + ": expected a 4x4 array");
        for (int c = 0; c < 4; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number()) fail(ErrorCode::Parse, where + ": non-numeric entry");
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return RigidTransform::from_matrix(m, 1e-4);
}

}  // namespace

PreparedBank prepare_bank(const PairData& pair, const PipelineConfig& cfg, const RefineOptions& opts,
                          std::vector<StageTiming>* timing) {
    cfg.validate();
    StageClock clock(timing);

    if (pair.ref.points.size() < 3 || pair.src.points.size() < 3)
        fail(ErrorCode::InvalidInput, "refine: each cloud needs at least 3 points");
    const bool have_descriptors = !pair.ref.descriptors.empty() && !pair.src.descriptors.empty();
    if (!have_descriptors && !pair.correspondences)
        fail(ErrorCode::InvalidInput, "refine: clouds carry no desc_* descriptors and no correspondences were given");
    if (have_descriptors && pair.ref.descriptors.dim() != pair.src.descriptors.dim())
        fail(ErrorCode::InvalidInput, "refine: descriptor dimensions differ between clouds");

    PreparedBank out;
    Rng rng(cfg.seed);
    const auto count = static_cast<std::size_t>(cfg.sample_count);
    out.ref = with_keypoints(pair.ref, count, static_cast<std::size_t>(rng.index(pair.ref.points.size())));
    out.src = with_keypoints(pair.src, count, static_cast<std::size_t>(rng.index(pair.src.points.size())));
    const PointCloud& ref = out.ref;
    const PointCloud& src = out.src;
    clock.mark("sampling");

    BankInputs bank_in;
    bank_in.mode = cfg.match_mode;
    if (have_descriptors) {
        bank_in.p_geometric = keypoint_descriptors(ref);
        bank_in.q_geometric = keypoint_descriptors(src);
    }
    if (pair.correspondences) bank_in.geometric_passthrough = *pair.correspondences;

    if (cfg.provider != ProviderKind::None) {
        const auto views = prepare_views(ref, src, pair.t_init, cfg, pair.pair_id);
        if (opts.depth_dump_dir) export_depth_maps(views, *opts.depth_dump_dir);
        clock.mark("projection");

        const auto provider = make_provider(cfg.provider, pair.paths.feature_dir);
        std::array<std::vector<FeatureMap>, 4> maps;
        for (std::size_t i = 0; i < views.size(); ++i)
            maps[i] = provide_features(*provider, FeatureRequest{views[i].depth_id, cfg.layers}, views[i].dense);
        clock.mark("provider");

        int channel_cap = cfg.pca_dim;
        for (const auto& m : maps[0]) channel_cap = std::min(channel_cap, m.channels);
        const auto ref_fused = aggregate_layers_joint(std::span(maps.data(), 2), channel_cap, cfg.pca_fit);
        const auto src_fused = aggregate_layers_joint(std::span(maps.data() + 2, 2), channel_cap, cfg.pca_fit);
        clock.mark("features");

        const RigidTransform inv = invert(pair.t_init);
        const auto p_ref_frame = ref.keypoints();
        const auto q_src_frame = src.keypoints();
        const auto q_ref_frame = apply_transform(pair.t_init, q_src_frame);
        const auto p_src_frame = apply_transform(inv, p_ref_frame);

        ViewInputs rv, sv;
        cloud_view_features(views[0], ref_fused[0], ref, p_ref_frame, cfg.common_threshold, rv.p_diffusion,
                            rv.p_common_diffusion, out.common_counts[0]);
        cloud_view_features(views[1], ref_fused[1], src, q_ref_frame, cfg.common_threshold, rv.q_diffusion,
                            rv.q_common_diffusion, out.common_counts[1]);
        cloud_view_features(views[2], src_fused[0], ref, p_src_frame, cfg.common_threshold, sv.p_diffusion,
                            sv.p_common_diffusion, out.common_counts[2]);
        cloud_view_features(views[3], src_fused[1], src, q_src_frame, cfg.common_threshold, sv.q_diffusion,
                            sv.q_common_diffusion, out.common_counts[3]);
        bank_in.ref_view = std::move(rv);
        bank_in.src_view = std::move(sv);
    }

    out.bank = build_candidate_bank(bank_in);
    out.all = union_of(out.bank);
    clock.mark("correspondence");
    return out;
}

RefineReport refine_pair(const PairData& pair, const PipelineConfig& cfg, const RefineOptions& opts) {
    RefineReport rep;
    rep.pair_id = pair.pair_id;
    rep.inputs = pair.paths;
    rep.seed = cfg.seed;
    rep.provider = std::string(to_string(cfg.provider));
    rep.t_init = pair.t_init;
    rep.config = cfg;

    const PreparedBank prepared = prepare_bank(pair, cfg, opts, opts.record_timing ? &rep.timing : nullptr);
    StageClock clock(opts.record_timing ? &rep.timing : nullptr);
    const PointCloud& ref = prepared.ref;
    const PointCloud& src = prepared.src;
    const CandidateBank& bank = prepared.bank;
    const CorrespondenceSet& all = prepared.all;
    rep.ref_keypoints = ref.keypoint_indices.size();
    rep.src_keypoints = src.keypoint_indices.size();
    rep.common_counts = prepared.common_counts;
    rep.union_size = all.size();

    std::vector<LabeledPairs> candidates;
    for (const auto& set : bank.sets) candidates.push_back({set.label, gather_pairs(set, ref, src)});
    const PointPairs evaluation = gather_pairs(all, ref, src);
    const RefinementResult result = aggregate_inliers(candidates, evaluation, pair.t_init, cfg.aggregation);
    clock.mark("aggregation");

    rep.refined = result.transform;
    rep.winning_set = result.winning_set;
    rep.degraded = result.degraded;
    rep.inlier_count = result.inlier_count;
    rep.inlier_trace = result.trace;
    for (std::size_t i = 0; i < kSetCount; ++i) {
        auto& s = rep.sets[i];
        s.label = bank.sets[i].label;
        s.size = bank.sets[i].size();
        s.absent = bank.sets[i].absent;
        if (i < result.candidates.size()) {
            s.eligible = result.candidates[i].eligible;
            s.inliers = result.candidates[i].inliers;
            s.note = result.candidates[i].note;
        }
    }
    if (pair.gt) {
        GroundTruthErrors g{*pair.gt};
        g.init_re = rotation_error(pair.t_init, *pair.gt);
        g.init_te = translation_error(pair.t_init, *pair.gt);
        g.refined_re = rotation_error(rep.refined, *pair.gt);
        g.refined_te = translation_error(rep.refined, *pair.gt);
        rep.ground_truth = g;
    }
    return rep;
}

std::string RefineReport::to_json() const {
    ordered_json j;
    j["schema"] = schema;
    j["pair_id"] = pair_id;
    ordered_json in;
    in["ref"] = inputs.ref.string();
    in["src"] = inputs.src.string();
    in["init"] = inputs.init.string();
    in["gt"] = inputs.gt ? ordered_json(inputs.gt->string()) : ordered_json(nullptr);
    in["correspondences"] = inputs.correspondences ? ordered_json(inputs.correspondences->string()) : ordered_json(nullptr);
    in["feature_dir"] = inputs.feature_dir.string();
    j["inputs"] = in;
    j["seed"] = seed;
    j["provider"] = provider;
    j["status"] = degraded ? "degraded" : "ok";
    j["t_init"] = matrix_json(t_init);
    j["refined"] = matrix_json(refined);
    j["winning_set"] = winning_set;
    j["inlier_count"] = inlier_count;
    j["inlier_trace"] = inlier_trace;
    auto& js = j["sets"] = ordered_json::array();
    for (const auto& s : sets)
        js.push_back({{"label", s.label}, {"size", s.size}, {"absent", s.absent}, {"eligible", s.eligible},
                      {"inliers", s.inliers}, {"note", s.note}});
    j["union_size"] = union_size;
    j["keypoints"] = {{"ref", ref_keypoints}, {"src", src_keypoints}};
    j["common_points"] = {{"ref_p", common_counts[0]}, {"ref_q", common_counts[1]}, {"src_p", common_counts[2]},
                          {"src_q", common_counts[3]}};
    if (ground_truth) {
        j["ground_truth"] = {{"gt", matrix_json(ground_truth->gt)},
                             {"init_re_deg", ground_truth->init_re},
                             {"init_te_m", ground_truth->init_te},
                             {"refined_re_deg", ground_truth->refined_re},
                             {"refined_te_m", ground_truth->refined_te}};
    } else {
        j["ground_truth"] = nullptr;
    }
    if (!timing.empty()) {
        auto& t = j["timing_ms"] = ordered_json::object();
        for (const auto& s : timing) t[s.stage] = s.ms;
    }
    j["config"] = ordered_json::parse(config_to_json(config));
    return j.dump(2) + "\n";
}

RefineReport RefineReport::from_json(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        fail(ErrorCode::Parse, origin + ": " + e.what());
    }
    RefineReport r;
    try {
        r.schema = j.at("schema").get<std::string>();
        if (r.schema != kReportSchema) fail(ErrorCode::Parse, origin + ": unsupported schema '" + r.schema + "'");
        r.pair_id = j.at("pair_id").get<std::string>();
        const auto& in = j.at("inputs");
        r.inputs.ref = in.at("ref").get<std::string>();
        r.inputs.src = in.at("src").get<std::string>();
        r.inputs.init = in.at("init").get<std::string>();
        if (!in.at("gt").is_null()) r.inputs.gt = in.at("gt").get<std::string>();
        if (!in.at("correspondences").is_null()) r.inputs.correspondences = in.at("correspondences").get<std::string>();
        r.inputs.feature_dir = in.at("feature_dir").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.provider = j.at("provider").get<std::string>();
        r.degraded = j.at("status").get<std::string>() == "degraded";
        r.t_init = matrix_from_json(j.at("t_init"), origin + ".t_init");
        r.refined = matrix_from_json(j.at("refined"), origin + ".refined");
        r.winning_set = j.at("winning_set").get<std::string>();
        r.inlier_count = j.at("inlier_count").get<std::size_t>();
        r.inlier_trace = j.at("inlier_trace").get<std::vector<std::size_t>>();
        const auto& sets = j.at("sets");
        if (!sets.is_array() || sets.size() != kSetCount) fail(ErrorCode::Parse, origin + ": expected five sets");
        for (std::size_t i = 0; i < kSetCount; ++i) {
            const auto& s = sets[i];
            r.sets[i] = {s.at("label").get<std::string>(), s.at("size").get<std::size_t>(), s.at("absent").get<bool>(),
                         s.at("eligible").get<bool>(), s.at("inliers").get<std::size_t>(), s.at("note").get<std::string>()};
        }
        r.union_size = j.at("union_size").get<std::size_t>();
        r.ref_keypoints = j.at("keypoints").at("ref").get<std::size_t>();
        r.src_keypoints = j.at("keypoints").at("src").get<std::size_t>();
        const auto& cp = j.at("common_points");
        r.common_counts = {cp.at("ref_p").get<std::size_t>(), cp.at("ref_q").get<std::size_t>(),
                           cp.at("src_p").get<std::size_t>(), cp.at("src_q").get<std::size_t>()};
        if (!j.at("ground_truth").is_null()) {
            const auto& g = j.at("ground_truth");
            GroundTruthErrors e{matrix_from_json(g.at("gt"), origin + ".ground_truth.gt")};
            e.init_re = g.at("init_re_deg").get<double>();
            e.init_te = g.at("init_te_m").get<double>();
            e.refined_re = g.at("refined_re_deg").get<double>();
            e.refined_te = g.at("refined_te_m").get<double>();
            r.ground_truth = e;
        }
        if (j.contains("timing_ms"))
            for (const auto& [k, v] : j.at("timing_ms").items()) r.timing.push_back({k, v.get<double>()});
        r.config = config_from_json(j.at("config").dump(), origin + ".config");
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, origin + ": " + e.what());
    }
    return r;
}

BatchResult refine_batch(const std::vector<PairPaths>& pairs, const std::vector<std::string>& pair_ids,
                         const PipelineConfig& cfg, const RefineOptions& opts) {
    if (pairs.size() != pair_ids.size()) fail(ErrorCode::InvalidInput, "refine_batch: one id per pair required");
    BatchResult out;
    out.reports.resize(pairs.size());
    out.errors.resize(pairs.size());
    out.exit_codes.assign(pairs.size(), kExitOk);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < pairs.size(); i = next++) {
            try {
                PairData data = load_pair(pairs[i], pair_ids[i]);
                RefineReport rep = refine_pair(data, cfg, opts);
                out.exit_codes[i] = rep.degraded ? kExitDegraded : kExitOk;
                out.reports[i] = std::move(rep);
            } catch (const Error& e) {
                out.errors[i] = e.what();
                out.exit_codes[i] = exit_code_for(e.code());
            } catch (const std::exception& e) {
                out.errors[i] = e.what();
                out.exit_codes[i] = kExitFailure;
            }
        }
    };
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), std::max<std::size_t>(pairs.size(), 1));
    std::vector<std::jthread> threads;
    for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
    return out;
}

}  // namespace difreg
