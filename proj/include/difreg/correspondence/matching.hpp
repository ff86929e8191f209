#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "difreg/correspondence/common_points.hpp"
#include "difreg/features/feature_map.hpp"

namespace difreg {

enum class MatchMode { Mutual, OneWay };

/// Cosine nearest neighbours from `ref_side` rows to `src_side` rows (lowest index wins ties).
/// Weight = (1 + cos)/2. Featureless rows never match. Throws InvalidInput on dim mismatch.
CorrespondenceSet match_features(const PointFeatures& ref_side, const PointFeatures& src_side,
                                 MatchMode mode = MatchMode::Mutual);

/// Rows of `f` whose point id is in `ids`, in the order of `ids` (ids missing from `f` are skipped).
PointFeatures restrict_to(const PointFeatures& f, std::span<const std::size_t> ids);

enum class SetId : std::size_t { CommonRef = 0, CommonSrc, DiffuRef, DiffuSrc, Geo3d };
inline constexpr std::size_t kSetCount = 5;
std::string_view set_label(SetId id) noexcept;

/// The five correspondence sets, always in SetId order.
struct CandidateBank {
    std::array<CorrespondenceSet, kSetCount> sets;

    CorrespondenceSet& operator[](SetId id) { return sets[static_cast<std::size_t>(id)]; }
    const CorrespondenceSet& operator[](SetId id) const { return sets[static_cast<std::size_t>(id)]; }
};

/// Per-view inputs: diffusion features sampled at visible keypoints, plus the common points
/// and the diffusion feature taken at each common point's partner pixel.
struct ViewInputs {
    PointFeatures p_diffusion;
    PointFeatures q_diffusion;
    PointFeatures p_common_diffusion;  // point_ids == common P keypoints
    PointFeatures q_common_diffusion;
};

struct BankInputs {
    PointFeatures p_geometric;
    PointFeatures q_geometric;
    std::optional<ViewInputs> ref_view;
    std::optional<ViewInputs> src_view;
    /// Upstream correspondences used verbatim as the 3D set when present.
    std::optional<CorrespondenceSet> geometric_passthrough;
    MatchMode mode = MatchMode::Mutual;
};

CandidateBank build_candidate_bank(const BankInputs& in);

/// Deduplicated union of every set (same (ref, src) keeps the largest weight), sorted by (ref, src).
CorrespondenceSet union_of(const CandidateBank& bank);

}  // namespace difreg
