#include "difreg/correspondence/matching.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>

#include "difreg/core/error.hpp"
#include "difreg/features/feature_ops.hpp"
#include "difreg/simd/kernels.hpp"

namespace difreg {
namespace {

struct Normalised {
    FeatureMatrix rows;
    std::vector<std::size_t> origin;  // row in the input PointFeatures
};

Normalised normalised_rows(const PointFeatures& f) {
    Normalised out{FeatureMatrix(0, f.dim()), {}};
    std::vector<double> buf(f.dim());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f.featureless.empty() && f.featureless[i]) continue;
        const auto r = f.vectors.row(i);
        std::copy(r.begin(), r.end(), buf.begin());
        if (!l2_normalize(buf)) continue;
        out.rows.append_row(buf);
        out.origin.push_back(i);
    }
    return out;
}

}  // namespace

CorrespondenceSet match_features(const PointFeatures& ref_side, const PointFeatures& src_side, MatchMode mode) {
    CorrespondenceSet out;
    if (ref_side.empty() || src_side.empty()) return out;
    if (ref_side.dim() != src_side.dim())
        fail(ErrorCode::InvalidInput, "match_features: feature dimensions differ (" +
                                          std::to_string(ref_side.dim()) + " vs " + std::to_string(src_side.dim()) + ")");
    const Normalised a = normalised_rows(ref_side);
    const Normalised b = normalised_rows(src_side);
    const std::size_t na = a.rows.rows(), nb = b.rows.rows(), dim = a.rows.dim();
    if (na == 0 || nb == 0) return out;

    const auto& k = simd::active();
    std::vector<double> sims(nb);
    std::vector<std::size_t> row_best(na);
    std::vector<double> row_sim(na);
    std::vector<std::size_t> col_best(nb, 0);
    std::vector<double> col_sim(nb, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < na; ++i) {
        k.dot_rows(a.rows.row(i).data(), b.rows.data().data(), nb, dim, sims.data());
        std::size_t best = 0;
        for (std::size_t j = 1; j < nb; ++j)
            if (sims[j] > sims[best]) best = j;
        row_best[i] = best;
        row_sim[i] = sims[best];
        for (std::size_t j = 0; j < nb; ++j)
            if (sims[j] > col_sim[j]) {
                col_sim[j] = sims[j];
                col_best[j] = i;
            }
    }

    for (std::size_t i = 0; i < na; ++i) {
        const std::size_t j = row_best[i];
        if (mode == MatchMode::Mutual && col_best[j] != i) continue;
        const double cos = std::clamp(row_sim[i], -1.0, 1.0);
        out.pairs.push_back({ref_side.point_ids[a.origin[i]], src_side.point_ids[b.origin[j]],
                             std::clamp((1.0 + cos) / 2.0, 0.0, 1.0)});
    }
    return out;
}

PointFeatures restrict_to(const PointFeatures& f, std::span<const std::size_t> ids) {
    std::unordered_map<std::size_t, std::size_t> where;
    for (std::size_t i = 0; i < f.size(); ++i) where.emplace(f.point_ids[i], i);
    PointFeatures out;
    out.vectors = FeatureMatrix(0, f.dim());
    for (auto id : ids) {
        const auto it = where.find(id);
        if (it == where.end()) continue;
        out.push_back(id, f.vectors.row(it->second), !f.featureless.empty() && f.featureless[it->second]);
    }
    return out;
}

std::string_view set_label(SetId id) noexcept {
    switch (id) {
        case SetId::CommonRef: return "common_ref";
        case SetId::CommonSrc: return "common_src";
        case SetId::DiffuRef: return "diffu_ref";
        case SetId::DiffuSrc: return "diffu_src";
        case SetId::Geo3d: return "geo3d";
    }
    return "";
}

namespace {

CorrespondenceSet match_common(const BankInputs& in, const ViewInputs& v) {
    const PointFeatures p_geo = restrict_to(in.p_geometric, v.p_common_diffusion.point_ids);
    const PointFeatures q_geo = restrict_to(in.q_geometric, v.q_common_diffusion.point_ids);
    const PointFeatures p_diff = restrict_to(v.p_common_diffusion, p_geo.point_ids);
    const PointFeatures q_diff = restrict_to(v.q_common_diffusion, q_geo.point_ids);
    return match_features(fuse_features(p_geo, p_diff), fuse_features(q_geo, q_diff), in.mode);
}

}  // namespace

CandidateBank build_candidate_bank(const BankInputs& in) {
    CandidateBank bank;
    for (std::size_t i = 0; i < kSetCount; ++i) bank.sets[i].label = std::string(set_label(static_cast<SetId>(i)));

    auto fill_view = [&](const std::optional<ViewInputs>& view, SetId common, SetId diffu) {
        if (!view) {
            bank[common].absent = bank[diffu].absent = true;
            return;
        }
        bank[common].pairs = match_common(in, *view).pairs;
        bank[diffu].pairs = match_features(view->p_diffusion, view->q_diffusion, in.mode).pairs;
    };
    fill_view(in.ref_view, SetId::CommonRef, SetId::DiffuRef);
    fill_view(in.src_view, SetId::CommonSrc, SetId::DiffuSrc);

    if (in.geometric_passthrough) {
        in.geometric_passthrough->validate();
        bank[SetId::Geo3d].pairs = in.geometric_passthrough->pairs;
    } else {
        bank[SetId::Geo3d].pairs = match_features(in.p_geometric, in.q_geometric, in.mode).pairs;
    }
    return bank;
}

CorrespondenceSet union_of(const CandidateBank& bank) {
    std::map<std::pair<std::size_t, std::size_t>, double> merged;
    for (const auto& set : bank.sets)
        for (const auto& c : set.pairs) {
            auto [it, inserted] = merged.emplace(std::make_pair(c.ref, c.src), c.weight);
            if (!inserted) it->second = std::max(it->second, c.weight);
        }
    CorrespondenceSet out;
    out.label = "union";
    out.pairs.reserve(merged.size());
    for (const auto& [key, w] : merged) out.pairs.push_back({key.first, key.second, w});
    return out;
}

}  // namespace difreg
