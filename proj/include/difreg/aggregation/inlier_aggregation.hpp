#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "difreg/aggregation/weighted_svd.hpp"

namespace difreg {

struct AggregationConfig {
    double tau_a = 0.10;       // acceptance radius, metres
    int nr = 5;                // reweighting rounds
    int k_final = 250;         // pairs kept for the final solve
    int min_pairs = 3;         // smallest set that gets its own hypothesis
    int final_solves = 1;      // top-K solves; >1 re-selects under each new estimate

    static AggregationConfig indoor() { return {}; }
    static AggregationConfig outdoor() { return {0.60, 5, 500, 3, 1}; }

    /// Throws Config on tau_a <= 0, nr < 0, k_final < 3, min_pairs < 3 or final_solves < 1.
    void validate() const;

    friend bool operator==(const AggregationConfig&, const AggregationConfig&) = default;
};

/// One candidate correspondence set in priority order (earlier wins ties).
struct LabeledPairs {
    std::string label;
    PointPairs pairs;
};

struct CandidateOutcome {
    std::string label;
    std::size_t size = 0;
    bool eligible = false;
    std::optional<RigidTransform> transform;
    std::size_t inliers = 0;  // on the evaluation set
    std::string note;         // why a set was skipped
};

struct Selection {
    RigidTransform transform;
    std::string label;  // "init" when nothing was eligible
    std::size_t inliers = 0;
    bool degraded = false;
    std::vector<CandidateOutcome> candidates;
};

/// Weighted SVD per eligible set; keeps the hypothesis with the most inliers on `evaluation`.
/// Falls back to `t_init` (degraded) when no set yields a transform.
Selection select_best(std::span<const LabeledPairs> candidates, const PointPairs& evaluation,
                      const RigidTransform& t_init, const AggregationConfig& cfg);

/// w ← w₀·exp(−r²/(2(τ/3)²)) for r < τ, zero otherwise.
std::vector<double> inlier_weights(const RigidTransform& t, const PointPairs& pairs, double tau);

struct ReweightResult {
    RigidTransform transform;
    std::size_t initial_inliers = 0;
    std::size_t inliers = 0;
    std::vector<std::size_t> trace;  // inlier count after each completed round
    bool vanished = false;           // stopped early: too few weighted pairs
};

/// Nr rounds of reweighted SVD, returning the best-by-inlier-count estimate seen.
ReweightResult reweight_iterate(const RigidTransform& t0, const PointPairs& pairs, const AggregationConfig& cfg);

struct RefinementResult {
    RigidTransform transform;
    std::size_t inlier_count = 0;
    std::string winning_set;
    std::vector<std::size_t> trace;  // selection, each reweight round, final
    bool degraded = false;
    std::vector<CandidateOutcome> candidates;
};

/// Final solve on the K highest-weight inliers under t; degraded passthrough with < 3 inliers.
RefinementResult finalize_topk(const RigidTransform& t, const PointPairs& pairs, const AggregationConfig& cfg);

/// select_best → reweight_iterate → finalize_topk, all evaluated on `evaluation`.
RefinementResult aggregate_inliers(std::span<const LabeledPairs> candidates, const PointPairs& evaluation,
                                   const RigidTransform& t_init, const AggregationConfig& cfg);

}  // namespace difreg
