#include "difreg/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "difreg/core/error.hpp"

namespace difreg {

using nlohmann::json;
using nlohmann::ordered_json;

PipelineConfig PipelineConfig::outdoor() {
    PipelineConfig c;
    c.common_threshold = 0.30;
    c.aggregation = AggregationConfig::outdoor();
    c.sample_count = 1000;
    c.recall = RecallThresholds::outdoor();
    return c;
}

void PipelineConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorCode::Config, "config: " + what); };
    try {
        intrinsics.validate();
    } catch (const Error& e) {
        bad(std::string("intrinsics: ") + e.what());
    }
    if (!(common_threshold > 0.0)) bad("common_threshold must be > 0");
    if (pca_dim < 1) bad("pca_dim must be >= 1");
    try {
        FeatureRequest{"config", layers}.validate();
    } catch (const Error& e) {
        bad(std::string("layers: ") + e.what());
    }
    aggregation.validate();
    if (sample_count < 3) bad("sample_count must be >= 3");
    if (!(recall.rotation_deg > 0.0) || !(recall.translation_m > 0.0)) bad("recall thresholds must be > 0");
    if (densify_kernel < 1 || densify_kernel % 2 == 0) bad("densify.kernel must be a positive odd number");
    if (densify_passes < 0) bad("densify.passes must be >= 0");
    if (workers < 1) bad("workers must be >= 1");
}

namespace {

const char* pca_fit_name(PcaFit f) { return f == PcaFit::JointPerPair ? "joint" : "per_map"; }
const char* match_mode_name(MatchMode m) { return m == MatchMode::Mutual ? "mutual" : "one_way"; }

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) fail(ErrorCode::Config, where + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!keys.count(k)) fail(ErrorCode::Config, where + ": unknown key '" + k + "'");
}

template <class T>
void take(const json& obj, const char* key, T& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::Config, where + "." + key + ": wrong type");
    }
}

}  // namespace

std::string config_to_json(const PipelineConfig& c) {
    ordered_json j;
    j["version"] = kConfigVersion;
    j["intrinsics"] = {{"fx", c.intrinsics.fx}, {"fy", c.intrinsics.fy}, {"cx", c.intrinsics.cx},
                       {"cy", c.intrinsics.cy}, {"width", c.intrinsics.width}, {"height", c.intrinsics.height}};
    j["common_threshold"] = c.common_threshold;
    j["pca_dim"] = c.pca_dim;
    j["pca_fit"] = pca_fit_name(c.pca_fit);
    j["layers"] = c.layers;
    j["aggregation"] = {{"tau_a", c.aggregation.tau_a},
                        {"nr", c.aggregation.nr},
                        {"k_final", c.aggregation.k_final},
                        {"min_pairs", c.aggregation.min_pairs},
                        {"final_solves", c.aggregation.final_solves}};
    j["provider"] = std::string(to_string(c.provider));
    j["sample_count"] = c.sample_count;
    j["recall"] = {{"rotation_deg", c.recall.rotation_deg}, {"translation_m", c.recall.translation_m}};
    j["seed"] = c.seed;
    j["densify"] = {{"kernel", c.densify_kernel}, {"passes", c.densify_passes}};
    j["match_mode"] = match_mode_name(c.match_mode);
    j["workers"] = c.workers;
    return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Config, origin + ": " + e.what());
    }
    reject_unknown(j,
                   {"version", "intrinsics", "common_threshold", "pca_dim", "pca_fit", "layers", "aggregation",
                    "provider", "sample_count", "recall", "seed", "densify", "match_mode", "workers"},
                   origin);
    int version = -1;
    take(j, "version", version, origin);
    if (version != kConfigVersion)
        fail(ErrorCode::Config, origin + ": version must be " + std::to_string(kConfigVersion));

    PipelineConfig c;
    if (j.contains("intrinsics")) {
        const auto& k = j["intrinsics"];
        const std::string w = origin + ".intrinsics";
        reject_unknown(k, {"fx", "fy", "cx", "cy", "width", "height"}, w);
        take(k, "fx", c.intrinsics.fx, w);
        take(k, "fy", c.intrinsics.fy, w);
        take(k, "cx", c.intrinsics.cx, w);
        take(k, "cy", c.intrinsics.cy, w);
        take(k, "width", c.intrinsics.width, w);
        take(k, "height", c.intrinsics.height, w);
    }
    take(j, "common_threshold", c.common_threshold, origin);
    take(j, "pca_dim", c.pca_dim, origin);
    if (j.contains("pca_fit")) {
        std::string s;
        take(j, "pca_fit", s, origin);
        if (s == "joint") c.pca_fit = PcaFit::JointPerPair;
        else if (s == "per_map") c.pca_fit = PcaFit::PerMap;
        else fail(ErrorCode::Config, origin + ".pca_fit: expected joint or per_map");
    }
    take(j, "layers", c.layers, origin);
    if (j.contains("aggregation")) {
        const auto& a = j["aggregation"];
        const std::string w = origin + ".aggregation";
        reject_unknown(a, {"tau_a", "nr", "k_final", "min_pairs", "final_solves"}, w);
        take(a, "tau_a", c.aggregation.tau_a, w);
        take(a, "nr", c.aggregation.nr, w);
        take(a, "k_final", c.aggregation.k_final, w);
        take(a, "min_pairs", c.aggregation.min_pairs, w);
        take(a, "final_solves", c.aggregation.final_solves, w);
    }
    if (j.contains("provider")) {
        std::string s;
        take(j, "provider", s, origin);
        try {
            c.provider = parse_provider_kind(s);
        } catch (const Error& e) {
            fail(ErrorCode::Config, origin + ".provider: " + e.what());
        }
    }
    take(j, "sample_count", c.sample_count, origin);
    if (j.contains("recall")) {
        const auto& r = j["recall"];
        const std::string w = origin + ".recall";
        reject_unknown(r, {"rotation_deg", "translation_m"}, w);
        take(r, "rotation_deg", c.recall.rotation_deg, w);
        take(r, "translation_m", c.recall.translation_m, w);
    }
    take(j, "seed", c.seed, origin);
    if (j.contains("densify")) {
        const auto& d = j["densify"];
        const std::string w = origin + ".densify";
        reject_unknown(d, {"kernel", "passes"}, w);
        take(d, "kernel", c.densify_kernel, w);
        take(d, "passes", c.densify_passes, w);
    }
    if (j.contains("match_mode")) {
        std::string s;
        take(j, "match_mode", s, origin);
        if (s == "mutual") c.match_mode = MatchMode::Mutual;
        else if (s == "one_way") c.match_mode = MatchMode::OneWay;
        else fail(ErrorCode::Config, origin + ".match_mode: expected mutual or one_way");
    }
    take(j, "workers", c.workers, origin);
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileMissing, "config file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), path.string());
}

void save_config(const std::filesystem::path& path, const PipelineConfig& cfg) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
    out << config_to_json(cfg);
}

}  // namespace difreg
