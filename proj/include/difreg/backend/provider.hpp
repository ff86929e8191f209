#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "difreg/features/feature_map.hpp"
#include "difreg/projection/depth_map.hpp"

namespace difreg {

enum class ProviderKind { Files, Synthetic, None };

std::string_view to_string(ProviderKind k) noexcept;
ProviderKind parse_provider_kind(std::string_view s);

inline const std::vector<int> kDefaultLayers{0, 3, 6};

struct FeatureRequest {
    std::string depth_id;  // "<pair_id>.<view>.<cloud>"
    std::vector<int> layers = kDefaultLayers;

    /// Layers must be sorted ascending, unique and within [0, 12].
    void validate() const;
};

/// Source of per-layer feature maps for one depth image.
class FeatureProvider {
public:
    virtual ~FeatureProvider() = default;
    virtual ProviderKind kind() const noexcept = 0;
    /// One map per requested layer, in request order, tagged with the depth resolution.
    virtual std::vector<FeatureMap> provide(const FeatureRequest& req, const DepthMap& depth) const = 0;
};

std::unique_ptr<FeatureProvider> make_provider(ProviderKind kind, const std::filesystem::path& feature_dir = {});

std::vector<FeatureMap> provide_features(const FeatureProvider& provider, const FeatureRequest& req,
                                         const DepthMap& depth);

}  // namespace difreg
