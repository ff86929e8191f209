// difreg command-line front end: refine, eval, genscene, extract-depth.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "difreg/core/error.hpp"
#include "difreg/core/log.hpp"
#include "difreg/pipeline/evaluate.hpp"
#include "difreg/pipeline/exit_codes.hpp"
#include "difreg/pipeline/refine.hpp"
#include "difreg/pipeline/scene.hpp"
#include "difreg/pipeline/views.hpp"
#include "difreg/simd/kernels.hpp"

using namespace difreg;

namespace {

struct ConfigFlags {
    std::optional<std::string> config_path;
    std::string preset = "indoor";
    std::optional<std::string> provider, pca_fit, match_mode;
    std::optional<double> common_threshold, tau_a, rr_rot, rr_trans, fx, fy, cx, cy;
    std::optional<int> pca_dim, nr, k_final, min_pairs, final_solves, sample_count, densify_kernel, densify_passes,
        workers, width, height;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<int>> layers;
    std::optional<std::string> save_config;

    void add(CLI::App* app) {
        app->add_option("--config", config_path, std::string("JSON config file (default: $") + kConfigEnvVar + ")");
        app->add_option("--preset", preset, "defaults to start from")->check(CLI::IsMember({"indoor", "outdoor"}));
        app->add_option("--provider", provider, "feature provider")->check(CLI::IsMember({"files", "synthetic", "none"}));
        app->add_option("--pca-dim", pca_dim);
        app->add_option("--pca-fit", pca_fit)->check(CLI::IsMember({"joint", "per_map"}));
        app->add_option("--layers", layers)->delimiter(',');
        app->add_option("--common-threshold", common_threshold, "metres");
        app->add_option("--tau", tau_a, "inlier radius, metres");
        app->add_option("--nr", nr, "reweighting rounds");
        app->add_option("--k-final", k_final);
        app->add_option("--min-pairs", min_pairs);
        app->add_option("--final-solves,--nr-final", final_solves, "top-K solves");
        app->add_option("--sample-count", sample_count);
        app->add_option("--seed", seed);
        app->add_option("--densify-kernel", densify_kernel);
        app->add_option("--densify-passes", densify_passes);
        app->add_option("--match-mode", match_mode)->check(CLI::IsMember({"mutual", "one_way"}));
        app->add_option("--workers", workers);
        app->add_option("--rr-rot", rr_rot, "recall rotation threshold, degrees");
        app->add_option("--rr-trans", rr_trans, "recall translation threshold, metres");
        app->add_option("--fx", fx);
        app->add_option("--fy", fy);
        app->add_option("--cx", cx);
        app->add_option("--cy", cy);
        app->add_option("--width", width);
        app->add_option("--height", height);
        app->add_option("--save-config", save_config, "write the effective config here");
    }

    PipelineConfig resolve() const {
        PipelineConfig c = preset == "outdoor" ? PipelineConfig::outdoor() : PipelineConfig::indoor();
        std::optional<std::string> path = config_path;
        if (!path)
            if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
        if (path) c = load_config(*path);
        if (provider) c.provider = parse_provider_kind(*provider);
        if (pca_fit) c.pca_fit = *pca_fit == "joint" ? PcaFit::JointPerPair : PcaFit::PerMap;
        if (match_mode) c.match_mode = *match_mode == "mutual" ? MatchMode::Mutual : MatchMode::OneWay;
        if (pca_dim) c.pca_dim = *pca_dim;
        if (layers) c.layers = *layers;
        if (common_threshold) c.common_threshold = *common_threshold;
        if (tau_a) c.aggregation.tau_a = *tau_a;
        if (nr) c.aggregation.nr = *nr;
        if (k_final) c.aggregation.k_final = *k_final;
        if (min_pairs) c.aggregation.min_pairs = *min_pairs;
        if (final_solves) c.aggregation.final_solves = *final_solves;
        if (sample_count) c.sample_count = *sample_count;
        if (seed) c.seed = *seed;
        if (densify_kernel) c.densify_kernel = *densify_kernel;
        if (densify_passes) c.densify_passes = *densify_passes;
        if (workers) c.workers = *workers;
        if (rr_rot) c.recall.rotation_deg = *rr_rot;
        if (rr_trans) c.recall.translation_m = *rr_trans;
        if (fx) c.intrinsics.fx = *fx;
        if (fy) c.intrinsics.fy = *fy;
        if (cx) c.intrinsics.cx = *cx;
        if (cy) c.intrinsics.cy = *cy;
        if (width) c.intrinsics.width = *width;
        if (height) c.intrinsics.height = *height;
        c.validate();
        if (save_config) save_config_file(c);
        return c;
    }

    void save_config_file(const PipelineConfig& c) const { ::difreg::save_config(*save_config, c); }
};

struct PairFlags {
    std::string ref, src, init;
    std::optional<std::string> gt, correspondences, pair_id;
    std::string feature_dir;

    void add(CLI::App* app, bool required) {
        auto* r = app->add_option("--ref", ref, "reference cloud (PLY)");
        auto* s = app->add_option("--src", src, "source cloud (PLY)");
        auto* i = app->add_option("--init", init, "initial transform, 4x4 text");
        if (required) {
            r->required();
            s->required();
            i->required();
        }
        app->add_option("--gt", gt, "ground-truth transform, 4x4 text");
        app->add_option("--correspondences", correspondences, "upstream matches: ref src [weight] per line");
        app->add_option("--features", feature_dir, "directory of RFT1 files for the files provider");
        app->add_option("--pair-id", pair_id, "identifier used in feature and depth file names");
    }

    PairPaths paths() const {
        PairPaths p{ref, src, init, std::nullopt, std::nullopt, feature_dir};
        if (gt) p.gt = *gt;
        if (correspondences) p.correspondences = *correspondences;
        return p;
    }

    std::string id() const {
        if (pair_id) return *pair_id;
        std::string stem = std::filesystem::path(ref).stem().string();
        if (stem.size() > 4 && stem.ends_with(".ref")) stem.resize(stem.size() - 4);
        return stem;
    }
};

void write_text(const std::optional<std::string>& path, const std::string& text) {
    if (!path || *path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open for writing: " + *path);
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed: " + *path);
}

std::string error_json(const std::string& command, ErrorCode code, const std::string& message) {
    nlohmann::ordered_json j;
    j["schema"] = "difreg.error/1";
    j["command"] = command;
    j["code"] = std::string(to_string(code));
    j["exit_code"] = exit_code_for(code);
    j["message"] = message;
    return j.dump(2) + "\n";
}

// Batch manifest: "pair_id ref src init [gt]" per line, '#' comments.
std::vector<std::pair<std::string, PairPaths>> read_manifest(const std::string& path, const std::string& feature_dir) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileMissing, "manifest not found: " + path);
    std::vector<std::pair<std::string, PairPaths>> out;
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) { return std::filesystem::path(p).is_absolute() ? p : (base / p).string(); };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string id, ref, src, init, gt;
        if (!(ls >> id)) continue;
        if (!(ls >> ref >> src >> init))
            fail(ErrorCode::Parse, path + " line " + std::to_string(line_no) + ": expected 'pair_id ref src init [gt]'");
        PairPaths p{resolve(ref), resolve(src), resolve(init), std::nullopt, std::nullopt, feature_dir};
        if (ls >> gt) p.gt = resolve(gt);
        out.emplace_back(id, p);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"difreg: depth-diffusion feature registration refinement"};
    app.require_subcommand(1);
    std::string isa;
    app.add_option("--isa", isa, "kernel set: scalar or avx2 (default: best available, or $DIFREG_ISA)")
        ->check(CLI::IsMember({"scalar", "avx2"}));
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "log info messages");

    // refine
    auto* refine = app.add_subcommand("refine", "refine an initial transform");
    ConfigFlags refine_cfg;
    PairFlags refine_pair_flags;
    std::optional<std::string> report_path, manifest, out_dir, dump_depth;
    bool timing = false;
    refine_cfg.add(refine);
    refine_pair_flags.add(refine, false);
    refine->add_option("--report", report_path, "report path (default: stdout)");
    refine->add_option("--manifest", manifest, "batch file: pair_id ref src init [gt] per line");
    refine->add_option("--out-dir", out_dir, "batch mode: directory for <pair_id>.report.json");
    refine->add_option("--dump-depth", dump_depth, "also write densified depth PNGs here");
    refine->add_flag("--timing", timing, "include per-stage wall-clock times (breaks byte-identical reruns)");

    // eval
    auto* eval = app.add_subcommand("eval", "summarise refine reports");
    std::vector<std::string> eval_reports;
    std::optional<std::string> gt_dir, eval_out;
    std::string eval_preset = "indoor";
    std::optional<double> eval_rot, eval_trans;
    eval->add_option("reports", eval_reports, "report files")->required();
    eval->add_option("--gt-dir", gt_dir, "directory of <pair_id>.gt.txt poses");
    eval->add_option("--preset", eval_preset)->check(CLI::IsMember({"indoor", "outdoor"}));
    eval->add_option("--rr-rot", eval_rot, "degrees");
    eval->add_option("--rr-trans", eval_trans, "metres");
    eval->add_option("--out", eval_out, "summary path (default: stdout)");

    // genscene
    auto* gen = app.add_subcommand("genscene", "generate a synthetic registration pair");
    SceneParams sp;
    std::string gen_dir = ".", gen_name = "scene";
    gen->add_option("--out-dir", gen_dir);
    gen->add_option("--name", gen_name, "file prefix and pair id");
    gen->add_option("--seed", sp.seed);
    gen->add_option("--points", sp.point_count, "points per cloud");
    gen->add_option("--overlap", sp.overlap);
    gen->add_option("--noise", sp.noise_sigma, "metres");
    gen->add_option("--init-rot", sp.init_rotation_deg, "degrees");
    gen->add_option("--init-trans", sp.init_translation_m, "metres");
    gen->add_option("--gt-rot", sp.gt_rotation_deg, "degrees");
    gen->add_option("--gt-trans", sp.gt_translation_m, "metres");
    gen->add_option("--desc-dim", sp.descriptor_dim);
    gen->add_option("--desc-bandwidth", sp.descriptor_bandwidth, "metres");
    gen->add_option("--desc-noise", sp.descriptor_noise);
    gen->add_option("--corrupt", sp.corrupted_fraction, "fraction of descriptors replaced by noise");
    gen->add_option("--room-scale", sp.room_scale, "room size multiplier");

    // extract-depth
    auto* extract = app.add_subcommand("extract-depth", "write 16-bit depth PNGs and framing metadata");
    ConfigFlags extract_cfg;
    PairFlags extract_pair_flags;
    std::string extract_dir = ".";
    extract_cfg.add(extract);
    extract_pair_flags.add(extract, true);
    extract->add_option("--out-dir", extract_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    if (verbose) log::set_min_level(log::Level::Info);
    std::string command = app.get_subcommands().front()->get_name();
    try {
        if (!isa.empty()) simd::set_active_isa(isa == "avx2" ? simd::Isa::Avx2 : simd::Isa::Scalar);

        if (refine->parsed()) {
            const PipelineConfig cfg = refine_cfg.resolve();
            RefineOptions opts;
            opts.record_timing = timing;
            if (dump_depth) opts.depth_dump_dir = *dump_depth;

            if (manifest) {
                if (!out_dir) fail(ErrorCode::InvalidInput, "--manifest requires --out-dir");
                const auto entries = read_manifest(*manifest, refine_pair_flags.feature_dir);
                std::vector<PairPaths> paths;
                std::vector<std::string> ids;
                for (const auto& [id, p] : entries) {
                    ids.push_back(id);
                    paths.push_back(p);
                }
                std::filesystem::create_directories(*out_dir);
                const BatchResult batch = refine_batch(paths, ids, cfg, opts);
                int worst = kExitOk;
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    const auto path = (std::filesystem::path(*out_dir) / (ids[i] + ".report.json")).string();
                    if (batch.reports[i]) {
                        write_text(path, batch.reports[i]->to_json());
                    } else {
                        nlohmann::ordered_json j;
                        j["schema"] = "difreg.error/1";
                        j["command"] = "refine";
                        j["pair_id"] = ids[i];
                        j["exit_code"] = batch.exit_codes[i];
                        j["message"] = batch.errors[i];
                        write_text(path, j.dump(2) + "\n");
                        std::cerr << "difreg: " << ids[i] << ": " << batch.errors[i] << "\n";
                    }
                    worst = std::max(worst, batch.exit_codes[i]);
                }
                return worst;
            }
            if (refine_pair_flags.ref.empty() || refine_pair_flags.src.empty() || refine_pair_flags.init.empty())
                fail(ErrorCode::InvalidInput, "refine needs --ref, --src and --init (or --manifest)");
            const PairData data = load_pair(refine_pair_flags.paths(), refine_pair_flags.id());
            const RefineReport rep = refine_pair(data, cfg, opts);
            write_text(report_path, rep.to_json());
            return rep.degraded ? kExitDegraded : kExitOk;
        }
        if (eval->parsed()) {
            RecallThresholds th = eval_preset == "outdoor" ? RecallThresholds::outdoor() : RecallThresholds::indoor();
            if (eval_rot) th.rotation_deg = *eval_rot;
            if (eval_trans) th.translation_m = *eval_trans;
            std::vector<std::filesystem::path> paths(eval_reports.begin(), eval_reports.end());
            std::optional<std::filesystem::path> gdir;
            if (gt_dir) gdir = *gt_dir;
            const auto summary = evaluate(entries_from_reports(paths, gdir), th);
            write_text(eval_out, summary.to_json());
            return kExitOk;
        }
        if (gen->parsed()) {
            const auto paths = write_scene(generate_scene(sp), gen_dir, gen_name);
            std::cout << paths.ref.string() << "\n" << paths.src.string() << "\n"
                      << paths.gt.string() << "\n" << paths.init.string() << "\n";
            return kExitOk;
        }
        if (extract->parsed()) {
            const PipelineConfig cfg = extract_cfg.resolve();
            const PairData data = load_pair(extract_pair_flags.paths(), extract_pair_flags.id());
            PointCloud ref, src;
            ref.points = data.ref.points;
            src.points = data.src.points;
            const auto views = prepare_views(ref, src, data.t_init, cfg, data.pair_id);
            for (const auto& e : export_depth_maps(views, extract_dir))
                std::cout << e.png.string() << "\n" << e.metadata.string() << "\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        const std::string text = error_json(command, e.code(), e.what());
        std::cerr << text;
        if (command == "refine" && report_path && *report_path != "-") {
            try {
                write_text(report_path, text);
            } catch (const Error&) {
            }
        }
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << error_json(command, ErrorCode::Estimation, e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
