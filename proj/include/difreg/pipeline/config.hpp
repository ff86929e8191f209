#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "difreg/aggregation/inlier_aggregation.hpp"
#include "difreg/backend/provider.hpp"
#include "difreg/core/metrics.hpp"
#include "difreg/correspondence/matching.hpp"
#include "difreg/features/feature_ops.hpp"
#include "difreg/projection/camera.hpp"

namespace difreg {

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kConfigEnvVar = "DIFREG_CONFIG";

struct PipelineConfig {
    CameraIntrinsics intrinsics;
    double common_threshold = 0.0375;
    int pca_dim = 128;
    PcaFit pca_fit = PcaFit::JointPerPair;
    std::vector<int> layers = kDefaultLayers;
    AggregationConfig aggregation;
    ProviderKind provider = ProviderKind::Synthetic;
    int sample_count = 500;
    RecallThresholds recall;
    std::uint64_t seed = 0;
    int densify_kernel = 3;
    int densify_passes = 2;
    MatchMode match_mode = MatchMode::Mutual;
    int workers = 1;

    static PipelineConfig indoor() { return {}; }
    static PipelineConfig outdoor();

    /// Throws Config naming the first offending field.
    void validate() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// JSON text with a "version" field; unknown keys are rejected.
std::string config_to_json(const PipelineConfig& cfg);
/// Fields absent from the text keep their defaults.
PipelineConfig config_from_json(const std::string& text, const std::string& origin = "config");

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& cfg);

}  // namespace difreg
