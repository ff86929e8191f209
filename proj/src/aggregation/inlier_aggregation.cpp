#include "difreg/aggregation/inlier_aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "difreg/core/error.hpp"
#include "difreg/core/log.hpp"

namespace difreg {

void AggregationConfig::validate() const {
    if (!(tau_a > 0.0) || !std::isfinite(tau_a)) fail(ErrorCode::Config, "aggregation: tau_a must be > 0");
    if (nr < 0) fail(ErrorCode::Config, "aggregation: nr must be >= 0");
    if (k_final < 3) fail(ErrorCode::Config, "aggregation: k_final must be >= 3");
    if (min_pairs < 3) fail(ErrorCode::Config, "aggregation: min_pairs must be >= 3");
    if (final_solves < 1) fail(ErrorCode::Config, "aggregation: final_solves must be >= 1");
}

Selection select_best(std::span<const LabeledPairs> candidates, const PointPairs& evaluation,
                      const RigidTransform& t_init, const AggregationConfig& cfg) {
    cfg.validate();
    Selection out;
    out.transform = t_init;
    out.label = "init";
    out.degraded = true;

    bool have_best = false;
    for (const auto& cand : candidates) {
        CandidateOutcome oc;
        oc.label = cand.label;
        oc.size = cand.pairs.size();
        if (cand.pairs.size() < static_cast<std::size_t>(cfg.min_pairs)) {
            oc.note = cand.pairs.empty() ? "empty" : "below min_pairs";
        } else {
            try {
                const RigidTransform t = weighted_svd(cand.pairs);
                oc.eligible = true;
                oc.transform = t;
                oc.inliers = count_inliers(t, evaluation, cfg.tau_a);
                // Strictly greater: earlier (higher priority) candidates keep ties.
                if (!have_best || oc.inliers > out.inliers) {
                    out.transform = t;
                    out.label = cand.label;
                    out.inliers = oc.inliers;
                    out.degraded = false;
                    have_best = true;
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Estimation) throw;
                oc.note = e.what();
                log::debug("select_best: dropping set " + cand.label + ": " + e.what());
            }
        }
        out.candidates.push_back(std::move(oc));
    }
    if (!have_best) out.inliers = count_inliers(t_init, evaluation, cfg.tau_a);
    return out;
}

std::vector<double> inlier_weights(const RigidTransform& t, const PointPairs& pairs, double tau) {
    const double sigma = tau / 3.0;
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    const auto r2 = pairs.squared_residuals(t);
    std::vector<double> w(pairs.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (std::sqrt(r2[i]) < tau) w[i] = pairs.weight(i) * std::exp(-r2[i] * inv_two_sigma_sq);
    return w;
}

ReweightResult reweight_iterate(const RigidTransform& t0, const PointPairs& pairs, const AggregationConfig& cfg) {
    cfg.validate();
    ReweightResult out;
    out.transform = t0;
    out.initial_inliers = out.inliers = count_inliers(t0, pairs, cfg.tau_a);

    RigidTransform current = t0;
    for (int round = 0; round < cfg.nr; ++round) {
        const auto w = inlier_weights(current, pairs, cfg.tau_a);
        const auto positive = std::count_if(w.begin(), w.end(), [](double x) { return x > 0.0; });
        if (positive < 3) {
            out.vanished = true;
            break;
        }
        try {
            current = weighted_svd(pairs.with_weights(w));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Estimation) throw;
            out.vanished = true;
            break;
        }
        const auto n = count_inliers(current, pairs, cfg.tau_a);
        out.trace.push_back(n);
        // >= so an equally supported but later (more refined) estimate replaces the earlier one.
        if (n >= out.inliers) {
            out.inliers = n;
            out.transform = current;
        }
    }
    return out;
}

RefinementResult finalize_topk(const RigidTransform& t, const PointPairs& pairs, const AggregationConfig& cfg) {
    cfg.validate();
    RefinementResult out;
    out.transform = t;

    RigidTransform current = t;
    for (int solve = 0; solve < cfg.final_solves; ++solve) {
        const auto w = inlier_weights(current, pairs, cfg.tau_a);
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w[i] > 0.0) rows.push_back(i);
        if (rows.size() < 3) {
            out.degraded = solve == 0;
            break;
        }
        std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        if (rows.size() > static_cast<std::size_t>(cfg.k_final)) rows.resize(static_cast<std::size_t>(cfg.k_final));
        std::vector<double> top_w;
        for (auto i : rows) top_w.push_back(w[i]);
        try {
            current = weighted_svd(pairs.subset(rows).with_weights(top_w));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Estimation) throw;
            out.degraded = solve == 0;
            break;
        }
        out.transform = current;
    }
    out.inlier_count = count_inliers(out.transform, pairs, cfg.tau_a);
    return out;
}

RefinementResult aggregate_inliers(std::span<const LabeledPairs> candidates, const PointPairs& evaluation,
                                   const RigidTransform& t_init, const AggregationConfig& cfg) {
    const Selection sel = select_best(candidates, evaluation, t_init, cfg);
    const ReweightResult rw = reweight_iterate(sel.transform, evaluation, cfg);
    RefinementResult out = finalize_topk(rw.transform, evaluation, cfg);
    out.winning_set = sel.label;
    out.degraded = out.degraded || sel.degraded;
    out.candidates = sel.candidates;
    out.trace.push_back(sel.inliers);
    out.trace.insert(out.trace.end(), rw.trace.begin(), rw.trace.end());
    out.trace.push_back(out.inlier_count);
    return out;
}

}  // namespace difreg
