#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "difreg/core/metrics.hpp"

namespace difreg {

struct EvalEntry {
    std::string pair_id;
    RigidTransform estimate;
    std::optional<RigidTransform> gt;  // pairs without one are counted as unevaluated
};

struct ErrorStats {
    std::size_t count = 0;
    double mean_re = 0.0, median_re = 0.0;  // degrees
    double mean_te = 0.0, median_te = 0.0;  // metres
};

struct PairResult {
    std::string pair_id;
    double re = 0.0, te = 0.0;
    bool registered = false;
};

struct EvalSummary {
    RecallThresholds thresholds;
    std::size_t evaluated = 0;
    std::size_t unevaluated = 0;
    std::size_t registered = 0;
    double recall = 0.0;
    ErrorStats all_pairs;
    std::optional<ErrorStats> success_only;  // none registered → absent
    std::vector<PairResult> pairs;

    std::string to_json() const;
};

/// Throws InvalidInput when no entry has a ground truth pose.
EvalSummary evaluate(const std::vector<EvalEntry>& entries, const RecallThresholds& th);

/// Ground truth comes from `<gt_dir>/<pair_id>.gt.txt` when gt_dir is given and the file
/// exists, otherwise from the report itself.
std::vector<EvalEntry> entries_from_reports(const std::vector<std::filesystem::path>& reports,
                                            const std::optional<std::filesystem::path>& gt_dir);

}  // namespace difreg
