#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "difreg/pipeline/config.hpp"
#include "difreg/pipeline/ply.hpp"

namespace difreg {

inline constexpr const char* kReportSchema = "difreg.refine/1";

struct PairPaths {
    std::filesystem::path ref, src, init;
    std::optional<std::filesystem::path> gt;
    std::optional<std::filesystem::path> correspondences;
    std::filesystem::path feature_dir;
};

/// One registration problem held in memory.
struct PairData {
    std::string pair_id = "pair";
    PlyData ref;
    PlyData src;
    RigidTransform t_init;
    std::optional<RigidTransform> gt;
    /// Upstream matches (point indices) used verbatim as the geo3d set.
    std::optional<CorrespondenceSet> correspondences;
    /// Where the data came from; echoed in the report, feature_dir feeds the files provider.
    PairPaths paths;
};


PairData load_pair(const PairPaths& paths, const std::string& pair_id);

/// "ref src weight" per line, '#' comments; indices must be in range for the clouds.
CorrespondenceSet load_correspondences(const std::filesystem::path& path, std::size_t ref_size,
                                       std::size_t src_size);

struct SetSummary {
    std::string label;
    std::size_t size = 0;
    bool absent = false;
    bool eligible = false;
    std::size_t inliers = 0;
    std::string note;
};

struct StageTiming {
    std::string stage;
    double ms = 0.0;
};

struct GroundTruthErrors {
    RigidTransform gt;
    double init_re = 0.0, init_te = 0.0;
    double refined_re = 0.0, refined_te = 0.0;
};

struct RefineReport {
    std::string schema = kReportSchema;
    std::string pair_id;
    PairPaths inputs;
    std::uint64_t seed = 0;
    std::string provider;
    bool degraded = false;
    RigidTransform t_init;
    RigidTransform refined;
    std::string winning_set;
    std::size_t inlier_count = 0;
    std::vector<std::size_t> inlier_trace;
    std::array<SetSummary, 5> sets;
    std::size_t union_size = 0;
    std::size_t ref_keypoints = 0, src_keypoints = 0;
    // Common points: P in ref view, Q in ref view, P in src view, Q in src view.
    std::array<std::size_t, 4> common_counts{};
    std::optional<GroundTruthErrors> ground_truth;
    std::vector<StageTiming> timing;  // empty unless requested
    PipelineConfig config;

    std::string to_json() const;
    static RefineReport from_json(const std::string& text, const std::string& origin = "report");
};

struct RefineOptions {
    bool record_timing = false;
    /// When set, densified depth maps are written here as 16-bit PNGs with framing sidecars.
    std::optional<std::filesystem::path> depth_dump_dir;
};

/// Keypoints and the five correspondence sets of one pair, before aggregation.
struct PreparedBank {
    PointCloud ref, src;  // with sampled keypoints
    CandidateBank bank;
    CorrespondenceSet all;  // deduplicated union, the evaluation set
    std::array<std::size_t, 4> common_counts{};
};

/// Sampling → projection → provider → fusion → candidate bank. Stage times go to `timing` when given.
PreparedBank prepare_bank(const PairData& pair, const PipelineConfig& cfg, const RefineOptions& opts = {},
                          std::vector<StageTiming>* timing = nullptr);

/// Projection → provider → fusion → candidate bank → inlier aggregation.
RefineReport refine_pair(const PairData& pair, const PipelineConfig& cfg, const RefineOptions& opts = {});

/// Runs pairs with up to cfg.workers threads; results keep the input order. Per-pair
/// failures are returned as the error message in `errors[i]` (empty on success).
struct BatchResult {
    std::vector<std::optional<RefineReport>> reports;
    std::vector<std::string> errors;
    std::vector<int> exit_codes;
};
BatchResult refine_batch(const std::vector<PairPaths>& pairs, const std::vector<std::string>& pair_ids,
                         const PipelineConfig& cfg, const RefineOptions& opts = {});

}  // namespace difreg
