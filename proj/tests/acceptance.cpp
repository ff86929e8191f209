// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "difreg/aggregation/inlier_aggregation.hpp"
#include "difreg/backend/rft.hpp"
#include "difreg/core/metrics.hpp"
#include "difreg/features/feature_ops.hpp"
#include "difreg/pipeline/ply.hpp"
#include "difreg/pipeline/pose_io.hpp"
#include "difreg/pipeline/refine.hpp"
#include "difreg/pipeline/scene.hpp"
#include "difreg/projection/depth_png.hpp"
#include "difreg/projection/render.hpp"
#include "support.hpp"
#include "trials.hpp"

using namespace difreg;
using namespace difreg::testing;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
    std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

PointFeatures one_row(const std::vector<double>& v) {
    PointFeatures f;
    f.vectors = FeatureMatrix(0, v.size());
    f.push_back(0, v);
    return f;
}

std::vector<double> random_row(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

PairData pair_from_scene(const Scene& s, const std::string& id) {
    PairData p;
    p.pair_id = id;
    p.ref = {s.ref_points, s.ref_descriptors};
    p.src = {s.src_points, s.src_descriptors};
    p.t_init = s.init;
    p.gt = s.gt;
    return p;
}

void weighted_svd_exactness() {
    Rng rng(101);
    double max_re = 0, max_te = 0, max_horn = 0;
    double svd_s = 0;
    const auto t0 = Clock::now();
    for (int trial = 0; trial < 1000; ++trial) {
        const auto gt = random_transform(rng, 180.0, 1.0);
        const auto n = 10 + static_cast<std::size_t>(rng.index(491));
        PointPairs pp;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            pp.push_back(q, gt.apply(q), rng.uniform(0.1, 1.0));
        }
        const auto s0 = Clock::now();
        const auto est = weighted_svd(pp);
        svd_s += seconds_since(s0);
        const auto horn = horn_quaternion(pp);
        max_re = std::max(max_re, rotation_error(est, gt));
        max_te = std::max(max_te, translation_error(est, gt));
        max_horn = std::max({max_horn, rotation_error(est, horn), translation_error(est, horn) * 1e3});
    }
    const double total = seconds_since(t0);
    report(max_re < 1e-6 && max_te < 1e-9 && max_horn < 1e-6 && total < 2.0, "weighted_svd_exactness",
           fmt("max RE %.3g deg, max TE %.3g m, max |svd-horn| %.3g, svd %.3f s, total %.3f s", max_re, max_te,
               max_horn, svd_s, total));
}

void robust_recovery_and_invariants() {
    const AggregationConfig cfg;
    int ok = 0, argmax_violations = 0, monotone_violations = 0, pipeline_mismatch = 0;
    double worst_re = 0, worst_te = 0;
    const int trials = 200;
    for (int s = 0; s < trials; ++s) {
        const auto t = make_robust_trial(static_cast<std::uint64_t>(1000 + s));
        const auto res = aggregate_inliers(t.sets, t.all, t.init, cfg);
        const double re = rotation_error(res.transform, t.gt), te = translation_error(res.transform, t.gt);
        ok += re < 0.5 && te < 0.01;
        worst_re = std::max(worst_re, re);
        worst_te = std::max(worst_te, te);

        const auto sel = select_best(t.sets, t.all, t.init, cfg);
        const auto sel_count = count_inliers(sel.transform, t.all, cfg.tau_a);
        for (const auto& c : sel.candidates)
            if (c.transform && count_inliers(*c.transform, t.all, cfg.tau_a) > sel_count) ++argmax_violations;
        const auto rw = reweight_iterate(sel.transform, t.all, cfg);
        if (rw.inliers < rw.initial_inliers || rw.initial_inliers != sel_count ||
            count_inliers(rw.transform, t.all, cfg.tau_a) != rw.inliers)
            ++monotone_violations;
        if (res.trace.empty() || res.trace.front() != sel_count) ++pipeline_mismatch;
    }
    const double rate = static_cast<double>(ok) / trials;
    report(rate >= 0.99, "robust_recovery",
           fmt("%d/%d trials RE<0.5 deg and TE<0.01 m (worst RE %.3g deg, TE %.3g m)", ok, trials, worst_re, worst_te));
    report(argmax_violations == 0 && monotone_violations == 0 && pipeline_mismatch == 0, "argmax_monotonicity",
           fmt("argmax violations %d, reweight violations %d, trace mismatches %d", argmax_violations,
               monotone_violations, pipeline_mismatch));
}

void projection_round_trip() {
    Rng rng(202);
    const CameraIntrinsics k;
    double worst_z = 0, worst_3d = 0;
    std::size_t checked = 0;
    for (int c = 0; c < 100; ++c) {
        const auto pose = random_transform(rng, 180.0, 2.0);
        const auto inv = invert(pose);
        std::vector<Vec3> world;
        const auto n = 500 + rng.index(4500);
        for (std::size_t i = 0; i < n; ++i) {
            const int u = static_cast<int>(rng.index(640)), v = static_cast<int>(rng.index(480));
            world.push_back(inv.apply(backproject_pixel(k, u, v, rng.uniform(0.2, 20.0))));
        }
        const auto view = render_depth(world, pose, k);
        const auto restored = dequantize_mm(quantize_mm(view.depth), k, pose);
        const auto lifted = backproject_to_world(restored);
        std::vector<std::size_t> slot(static_cast<std::size_t>(k.width * k.height), lifted.points.size());
        for (std::size_t j = 0; j < lifted.pixels.size(); ++j) slot[lifted.pixels[j]] = j;
        for (std::size_t i = 0; i < world.size(); ++i) {
            if (!view.pixels.visible(i)) continue;
            const auto j = slot[view.pixels.pixel_of(i)];
            if (j == lifted.points.size()) {
                worst_z = worst_3d = 1e9;
                continue;
            }
            worst_z = std::max(worst_z, std::abs(pose.apply(lifted.points[j]).z() - pose.apply(world[i]).z()));
            worst_3d = std::max(worst_3d, (lifted.points[j] - world[i]).norm());
            ++checked;
        }
    }
    report(worst_z <= 5e-4, "projection_round_trip",
           fmt("100 clouds, %zu visible points, max depth error %.6g m (3D %.3g m)", checked, worst_z, worst_3d));
}

void fusion_algebra() {
    Rng rng(303);
    double cos_err = 0, scale_err = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto gdim = 1 + rng.index(256), ddim = 1 + rng.index(384);
        const auto ga = random_row(rng, gdim), gb = random_row(rng, gdim);
        const auto da = random_row(rng, ddim), db = random_row(rng, ddim);
        const auto fa = fuse_features(one_row(ga), one_row(da));
        const auto fb = fuse_features(one_row(gb), one_row(db));
        cos_err = std::max(cos_err, std::abs(cosine(fa.vectors.row(0), fb.vectors.row(0)) -
                                             (cosine(ga, gb) + cosine(da, db)) / 2.0));
        auto gs = ga, ds = da;
        const double a = std::exp(rng.uniform(-10, 10)), b = std::exp(rng.uniform(-10, 10));
        for (auto& x : gs) x *= a;
        for (auto& x : ds) x *= b;
        const auto fs = fuse_features(one_row(gs), one_row(ds));
        for (std::size_t j = 0; j < fa.dim(); ++j)
            scale_err = std::max(scale_err, std::abs(fs.vectors.row(0)[j] - fa.vectors.row(0)[j]));
    }
    report(cos_err <= 1e-9 && scale_err <= 1e-12, "fusion_algebra",
           fmt("1000 pairs, max cosine error %.3g, max rescaling drift %.3g", cos_err, scale_err));
}

void end_to_end() {
    const auto t0 = Clock::now();
    const PipelineConfig cfg;
    int ok = 0;
    double re_ratio_sum = 0, te_ratio_sum = 0;
    const int scenes = 50;
    for (int i = 0; i < scenes; ++i) {
        SceneParams sp;
        sp.seed = static_cast<std::uint64_t>(1000 + i);
        const auto s = generate_scene(sp);
        const auto rep = refine_pair(pair_from_scene(s, "e2e"), cfg);
        const auto& g = *rep.ground_truth;
        ok += g.refined_re <= 0.5 * g.init_re && g.refined_te <= 0.5 * g.init_te;
        re_ratio_sum += g.refined_re / g.init_re;
        te_ratio_sum += g.refined_te / g.init_te;
    }
    const double elapsed = seconds_since(t0);
    report(ok >= 45 && elapsed < 300.0, "end_to_end_refinement",
           fmt("%d/%d scenes halved both RE and TE (mean RE ratio %.3f, TE ratio %.3f), %.1f s", ok, scenes,
               re_ratio_sum / scenes, te_ratio_sum / scenes, elapsed));
}

void determinism() {
    int same = 0;
    const int runs = 5;
    for (int i = 0; i < runs; ++i) {
        SceneParams sp;
        sp.seed = static_cast<std::uint64_t>(77 + i);
        PipelineConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(i);
        const auto a = refine_pair(pair_from_scene(generate_scene(sp), "det"), cfg).to_json();
        const auto b = refine_pair(pair_from_scene(generate_scene(sp), "det"), cfg).to_json();
        same += a == b;
    }

    TempDir dir("accept_det");
    std::vector<PairPaths> paths;
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) {
        SceneParams sp;
        sp.seed = static_cast<std::uint64_t>(90 + i);
        const auto p = write_scene(generate_scene(sp), dir.path(), "d" + std::to_string(i));
        paths.push_back({p.ref, p.src, p.init, p.gt, {}, {}});
        ids.push_back("d" + std::to_string(i));
    }
    PipelineConfig cfg;
    const auto seq = refine_batch(paths, ids, cfg);
    cfg.workers = 3;
    const auto par = refine_batch(paths, ids, cfg);
    int batch_same = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!seq.reports[i] || !par.reports[i]) continue;
        auto p = *par.reports[i];
        p.config.workers = seq.reports[i]->config.workers;
        batch_same += seq.reports[i]->to_json() == p.to_json();
    }
    report(same == runs && batch_same == 3, "determinism",
           fmt("%d/%d repeated reports identical, %d/3 batch reports identical across worker counts", same, runs,
               batch_same));
}

void format_round_trips() {
    TempDir dir("accept_fmt");
    Rng rng(404);
    int ply_ok = 0, pose_ok = 0, rft_ok = 0, png_ok = 0;
    const int n = 20;
    for (int i = 0; i < n; ++i) {
        const auto count = 1 + rng.index(2000);
        const auto dim = rng.index(40);
        std::vector<Vec3> pts(count);
        FeatureMatrix desc(count, dim);
        for (auto& p : pts) p = Vec3(rng.normal(), rng.normal(), rng.normal()) * 10.0;
        // Descriptors are always stored as float32.
        for (std::size_t r = 0; r < count; ++r)
            for (auto& x : desc.row(r)) x = static_cast<float>(rng.normal());
        bool ply = true;
        for (auto [format, scalar] : {std::pair{PlyFormat::BinaryLittleEndian, PlyScalar::Float64},
                                      std::pair{PlyFormat::Ascii, PlyScalar::Float64},
                                      std::pair{PlyFormat::BinaryLittleEndian, PlyScalar::Float32}}) {
            auto p32 = pts;
            const auto& d32 = desc;
            if (scalar == PlyScalar::Float32)
                for (auto& p : p32) p = p.cast<float>().cast<double>();
            write_ply(dir / "c.ply", p32, dim ? &d32 : nullptr, format, scalar);
            const auto back = read_ply(dir / "c.ply");
            ply = ply && back.points == p32 && back.descriptors.rows() == (dim ? count : 0);
            for (std::size_t r = 0; dim && ply && r < count; ++r)
                ply = std::equal(d32.row(r).begin(), d32.row(r).end(), back.descriptors.row(r).begin());
        }
        ply_ok += ply;

        const auto t = random_transform(rng, 180.0, 100.0);
        write_pose(dir / "p.txt", t);
        pose_ok += load_pose(dir / "p.txt").matrix() == t.matrix();

        FeatureMap fm(1 + static_cast<int>(rng.index(64)), 1 + static_cast<int>(rng.index(88)),
                      1 + static_cast<int>(rng.index(96)), static_cast<int>(rng.index(13)));
        for (auto& x : fm.data) x = static_cast<float>(rng.normal());
        write_feature_file(fm, dir / "f.rft");
        const auto fb = load_feature_file(dir / "f.rft");
        rft_ok += fb.height == fm.height && fb.width == fm.width && fb.channels == fm.channels &&
                  fb.layer_id == fm.layer_id && std::memcmp(fb.data.data(), fm.data.data(), fm.data.size() * 4) == 0;

        const int w = 1 + static_cast<int>(rng.index(700)), h = 1 + static_cast<int>(rng.index(500));
        DepthImage16 img{w, h, std::vector<std::uint16_t>(static_cast<std::size_t>(w * h))};
        for (auto& px : img.pixels) px = static_cast<std::uint16_t>(rng.bits() & 0xffff);
        write_depth_png(dir / "d.png", img);
        png_ok += read_depth_png(dir / "d.png") == img;
    }
    report(ply_ok == n && pose_ok == n && rft_ok == n && png_ok == n, "format_round_trips",
           fmt("bit-exact fixtures: PLY %d/%d, pose %d/%d, RFT1 %d/%d, depth PNG %d/%d", ply_ok, n, pose_ok, n, rft_ok,
               n, png_ok, n));
}

}  // namespace

int main() {
    weighted_svd_exactness();
    robust_recovery_and_invariants();
    projection_round_trip();
    fusion_algebra();
    end_to_end();
    determinism();
    format_round_trips();
    return failures == 0 ? 0 : 1;
}
