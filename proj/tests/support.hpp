#pragma once

#include <unistd.h>

#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "difreg/core/random.hpp"
#include "difreg/core/transform.hpp"

namespace difreg::testing {

inline constexpr double kDeg = std::numbers::pi / 180.0;

inline RigidTransform random_transform(Rng& rng, double max_deg = 180.0, double max_t = 1.0) {
    const Mat3 r = axis_angle(rng.unit_vector(), rng.uniform(0.0, max_deg) * kDeg);
    return {r, rng.unit_vector() * rng.uniform(0.0, max_t)};
}

inline std::vector<Vec3> random_points(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
    return pts;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
        path_ = std::filesystem::temp_directory_path() / ("difreg_" + tag + "_" + std::to_string(rng.bits() % 1000000007));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace difreg::testing
