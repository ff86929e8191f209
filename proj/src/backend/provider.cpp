#include "difreg/backend/provider.hpp"

#include <algorithm>

#include "difreg/backend/rft.hpp"
#include "difreg/backend/synthetic_descriptor.hpp"
#include "difreg/core/error.hpp"

namespace difreg {

std::string_view to_string(ProviderKind k) noexcept {
    switch (k) {
        case ProviderKind::Files: return "files";
        case ProviderKind::Synthetic: return "synthetic";
        case ProviderKind::None: return "none";
    }
    return "";
}

ProviderKind parse_provider_kind(std::string_view s) {
    if (s == "files") return ProviderKind::Files;
    if (s == "synthetic") return ProviderKind::Synthetic;
    if (s == "none") return ProviderKind::None;
    fail(ErrorCode::Config, "unknown feature provider '" + std::string(s) + "' (files|synthetic|none)");
}

void FeatureRequest::validate() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i] < 0 || layers[i] > 12) fail(ErrorCode::Config, "feature layers must lie in [0, 12]");
        if (i > 0 && layers[i] <= layers[i - 1]) fail(ErrorCode::Config, "feature layers must be ascending and unique");
    }
}

namespace {

class NoneProvider final : public FeatureProvider {
public:
    ProviderKind kind() const noexcept override { return ProviderKind::None; }
    std::vector<FeatureMap> provide(const FeatureRequest& req, const DepthMap&) const override {
        req.validate();
        return {};
    }
};

class SyntheticProvider final : public FeatureProvider {
public:
    ProviderKind kind() const noexcept override { return ProviderKind::Synthetic; }
    std::vector<FeatureMap> provide(const FeatureRequest& req, const DepthMap& depth) const override {
        req.validate();
        return synthetic_descriptor(depth, req.layers);
    }
};

class FileProvider final : public FeatureProvider {
public:
    explicit FileProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}
    ProviderKind kind() const noexcept override { return ProviderKind::Files; }
    std::vector<FeatureMap> provide(const FeatureRequest& req, const DepthMap& depth) const override {
        req.validate();
        std::vector<FeatureMap> out;
        for (int layer : req.layers) {
            FeatureMap fm = load_feature_file(dir_ / feature_file_name(req.depth_id, layer));
            if (fm.layer_id != layer)
                fail(ErrorCode::InvalidInput, "feature file for layer " + std::to_string(layer) + " is tagged layer " +
                                                  std::to_string(fm.layer_id));
            // Extractor inputs are uniformly rescaled copies of this raster, so pixel
            // centres map proportionally onto the feature grid.
            fm.source_height = depth.height();
            fm.source_width = depth.width();
            out.push_back(std::move(fm));
        }
        return out;
    }

private:
    std::filesystem::path dir_;
};

}  // namespace

std::unique_ptr<FeatureProvider> make_provider(ProviderKind kind, const std::filesystem::path& feature_dir) {
    switch (kind) {
        case ProviderKind::None: return std::make_unique<NoneProvider>();
        case ProviderKind::Synthetic: return std::make_unique<SyntheticProvider>();
        case ProviderKind::Files:
            if (feature_dir.empty()) fail(ErrorCode::Config, "files provider needs a feature directory");
            return std::make_unique<FileProvider>(feature_dir);
    }
    fail(ErrorCode::Config, "unknown provider kind");
}

std::vector<FeatureMap> provide_features(const FeatureProvider& provider, const FeatureRequest& req,
                                         const DepthMap& depth) {
    auto maps = provider.provide(req, depth);
    if (provider.kind() != ProviderKind::None) {
        if (maps.size() != req.layers.size()) fail(ErrorCode::InvalidInput, "provider returned the wrong layer count");
        for (std::size_t i = 0; i < maps.size(); ++i)
            if (maps[i].layer_id != req.layers[i]) fail(ErrorCode::InvalidInput, "provider layer order mismatch");
    }
    return maps;
}

}  // namespace difreg
