#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "difreg/core/transform.hpp"
#include "difreg/core/types.hpp"

namespace difreg {

struct SceneParams {
    std::uint64_t seed = 0;
    std::size_t point_count = 20000;  // per cloud
    double overlap = 0.4;             // fraction of ref points that also lie in src
    double noise_sigma = 0.005;       // metres, per axis, both clouds
    double init_rotation_deg = 5.0;
    double init_translation_m = 0.2;
    double gt_rotation_deg = 20.0;    // largest ground-truth rotation
    double gt_translation_m = 0.5;    // largest ground-truth translation
    int descriptor_dim = 128;
    double descriptor_bandwidth = 0.1;  // metres
    double descriptor_noise = 0.02;
    double corrupted_fraction = 0.2;
    double room_scale = 0.35;  // multiplies every room and clutter dimension (1.0: 3.2 m wide room)

    /// Throws InvalidInput naming the offending field.
    void validate() const;
};

/// Room (floor and three walls) plus random boxes, cylinders and spheres, sampled by area.
/// P and Q are overlapping slabs of the same sample; src = gt⁻¹·Q, T_init perturbs gt by
/// exactly init_rotation_deg and init_translation_m.
struct Scene {
    std::vector<Vec3> ref_points;
    std::vector<Vec3> src_points;
    FeatureMatrix ref_descriptors;  // one row per point
    FeatureMatrix src_descriptors;
    RigidTransform gt;
    RigidTransform init;
};

Scene generate_scene(const SceneParams& params);

struct ScenePaths {
    std::filesystem::path ref, src, gt, init;
};

/// `<dir>/<name>.{ref.ply, src.ply, gt.txt, init.txt}`.
ScenePaths scene_paths(const std::filesystem::path& dir, const std::string& name);
ScenePaths write_scene(const Scene& scene, const std::filesystem::path& dir, const std::string& name);

/// Fraction of `ref` points with a `src` neighbour closer than `radius` once src is mapped by `gt`.
double measured_overlap(const std::vector<Vec3>& ref, const std::vector<Vec3>& src, const RigidTransform& gt,
                        double radius = 0.025);

}  // namespace difreg
