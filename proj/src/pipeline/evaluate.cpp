#include "difreg/pipeline/evaluate.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "difreg/core/error.hpp"
#include "difreg/pipeline/pose_io.hpp"
#include "difreg/pipeline/refine.hpp"

namespace difreg {
namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ErrorStats stats_of(const std::vector<PairResult>& rows) {
    ErrorStats s;
    s.count = rows.size();
    std::vector<double> re, te;
    for (const auto& r : rows) {
        re.push_back(r.re);
        te.push_back(r.te);
    }
    double sum_re = 0.0, sum_te = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sum_re += re[i];
        sum_te += te[i];
    }
    s.mean_re = sum_re / static_cast<double>(rows.size());
    s.mean_te = sum_te / static_cast<double>(rows.size());
    s.median_re = median(re);
    s.median_te = median(te);
    return s;
}

nlohmann::ordered_json stats_json(const ErrorStats& s) {
    return {{"count", s.count},     {"mean_re_deg", s.mean_re},   {"median_re_deg", s.median_re},
            {"mean_te_m", s.mean_te}, {"median_te_m", s.median_te}};
}

}  // namespace

EvalSummary evaluate(const std::vector<EvalEntry>& entries, const RecallThresholds& th) {
    if (!(th.rotation_deg > 0.0) || !(th.translation_m > 0.0))
        fail(ErrorCode::InvalidInput, "eval: thresholds must be positive");
    EvalSummary out;
    out.thresholds = th;
    std::vector<PairResult> successes;
    for (const auto& e : entries) {
        if (!e.gt) {
            ++out.unevaluated;
            continue;
        }
        PairResult r{e.pair_id, rotation_error(e.estimate, *e.gt), translation_error(e.estimate, *e.gt)};
        r.registered = is_registered({e.estimate, *e.gt}, th);
        out.pairs.push_back(r);
        if (r.registered) successes.push_back(r);
    }
    if (out.pairs.empty()) fail(ErrorCode::InvalidInput, "eval: no pair has a ground-truth pose");
    out.evaluated = out.pairs.size();
    out.registered = successes.size();
    out.recall = static_cast<double>(out.registered) / static_cast<double>(out.evaluated);
    out.all_pairs = stats_of(out.pairs);
    if (!successes.empty()) out.success_only = stats_of(successes);
    return out;
}

std::string EvalSummary::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = "difreg.eval/1";
    j["thresholds"] = {{"rotation_deg", thresholds.rotation_deg}, {"translation_m", thresholds.translation_m}};
    j["evaluated"] = evaluated;
    j["unevaluated"] = unevaluated;
    j["registered"] = registered;
    j["registration_recall"] = recall;
    j["all_pairs"] = stats_json(all_pairs);
    j["success_only"] = success_only ? stats_json(*success_only) : nlohmann::ordered_json(nullptr);
    auto& rows = j["pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : pairs)
        rows.push_back({{"pair_id", p.pair_id}, {"re_deg", p.re}, {"te_m", p.te}, {"registered", p.registered}});
    return j.dump(2) + "\n";
}

std::vector<EvalEntry> entries_from_reports(const std::vector<std::filesystem::path>& reports,
                                            const std::optional<std::filesystem::path>& gt_dir) {
    std::vector<EvalEntry> out;
    for (const auto& path : reports) {
        std::ifstream in(path);
        if (!in) fail(ErrorCode::FileMissing, "report not found: " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        const RefineReport r = RefineReport::from_json(ss.str(), path.string());
        EvalEntry e{r.pair_id, r.refined, std::nullopt};
        if (gt_dir && std::filesystem::exists(*gt_dir / (r.pair_id + ".gt.txt")))
            e.gt = load_pose(*gt_dir / (r.pair_id + ".gt.txt"));
        else if (r.ground_truth)
            e.gt = r.ground_truth->gt;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace difreg
