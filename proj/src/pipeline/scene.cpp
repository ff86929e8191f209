#include "difreg/pipeline/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "difreg/core/error.hpp"
#include "difreg/core/random.hpp"
#include "difreg/core/spatial_index.hpp"
#include "difreg/pipeline/ply.hpp"
#include "difreg/pipeline/pose_io.hpp"

namespace difreg {

void SceneParams::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorCode::InvalidInput, "scene: " + what); };
    if (point_count < 10) bad("point_count must be >= 10");
    if (!(overlap > 0.0 && overlap <= 1.0)) bad("overlap must be in (0, 1]");
    if (!(noise_sigma >= 0.0)) bad("noise_sigma must be >= 0");
    if (!(init_rotation_deg >= 0.0 && init_rotation_deg < 180.0)) bad("init_rotation_deg must be in [0, 180)");
    if (!(init_translation_m >= 0.0)) bad("init_translation_m must be >= 0");
    if (!(gt_rotation_deg >= 0.0 && gt_rotation_deg < 180.0)) bad("gt_rotation_deg must be in [0, 180)");
    if (!(gt_translation_m >= 0.0)) bad("gt_translation_m must be >= 0");
    if (descriptor_dim < 1) bad("descriptor_dim must be >= 1");
    if (!(descriptor_bandwidth > 0.0)) bad("descriptor_bandwidth must be > 0");
    if (!(descriptor_noise >= 0.0)) bad("descriptor_noise must be >= 0");
    if (!(corrupted_fraction >= 0.0 && corrupted_fraction <= 1.0)) bad("corrupted_fraction must be in [0, 1]");
    if (!(room_scale > 0.0)) bad("room_scale must be > 0");
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Camera convention: x right, y down, z forward. The floor is the plane y = floor_y.
struct Surface {
    enum Kind { Rect, CylinderSide, Disk, Sphere } kind;
    Vec3 origin;
    Vec3 e1 = Vec3::Zero(), e2 = Vec3::Zero();
    double radius = 0.0, height = 0.0;

    double area() const {
        switch (kind) {
            case Rect: return e1.cross(e2).norm();
            case CylinderSide: return 2.0 * std::numbers::pi * radius * height;
            case Disk: return std::numbers::pi * radius * radius;
            case Sphere: return 4.0 * std::numbers::pi * radius * radius;
        }
        return 0.0;
    }

    Vec3 sample(Rng& rng) const {
        switch (kind) {
            case Rect: {
                const double u = rng.uniform(), v = rng.uniform();
                return origin + u * e1 + v * e2;
            }
            case CylinderSide: {
                const double a = rng.uniform(0.0, 2.0 * std::numbers::pi), h = rng.uniform();
                return origin + Vec3(radius * std::cos(a), -h * height, radius * std::sin(a));
            }
            case Disk: {
                const double a = rng.uniform(0.0, 2.0 * std::numbers::pi), r = radius * std::sqrt(rng.uniform());
                return origin + Vec3(r * std::cos(a), 0.0, r * std::sin(a));
            }
            case Sphere: return origin + radius * rng.unit_vector();
        }
        return origin;
    }
};

void add_box(std::vector<Surface>& s, const Vec3& lo, const Vec3& hi) {
    const Vec3 dx(hi.x() - lo.x(), 0, 0), dy(0, hi.y() - lo.y(), 0), dz(0, 0, hi.z() - lo.z());
    s.push_back({Surface::Rect, lo, dx, dz});                       // top (smallest y)
    s.push_back({Surface::Rect, lo, dx, dy});                       // front
    s.push_back({Surface::Rect, lo + dz, dx, dy});                  // back
    s.push_back({Surface::Rect, lo, dz, dy});                       // left
    s.push_back({Surface::Rect, lo + dx, dz, dy});                  // right
}

std::vector<Surface> build_room(Rng& rng) {
    const double half_w = rng.uniform(1.4, 1.8);
    const double z_near = 0.8;
    const double z_far = rng.uniform(3.8, 4.6);
    const double floor_y = rng.uniform(1.1, 1.4);
    const double ceil_y = floor_y - rng.uniform(2.3, 2.6);

    std::vector<Surface> s;
    s.push_back({Surface::Rect, {-half_w, floor_y, z_near}, {2 * half_w, 0, 0}, {0, 0, z_far - z_near}});
    s.push_back({Surface::Rect, {-half_w, ceil_y, z_far}, {2 * half_w, 0, 0}, {0, floor_y - ceil_y, 0}});
    s.push_back({Surface::Rect, {-half_w, ceil_y, z_near}, {0, 0, z_far - z_near}, {0, floor_y - ceil_y, 0}});
    s.push_back({Surface::Rect, {half_w, ceil_y, z_near}, {0, 0, z_far - z_near}, {0, floor_y - ceil_y, 0}});

    for (int i = 0; i < 6; ++i) {
        const double w = rng.uniform(0.2, 0.6), d = rng.uniform(0.2, 0.6), h = rng.uniform(0.2, 0.9);
        const double x = rng.uniform(-half_w + 0.1, half_w - 0.1 - w);
        const double z = rng.uniform(z_near + 0.8, z_far - 0.1 - d);
        add_box(s, {x, floor_y - h, z}, {x + w, floor_y, z + d});
    }
    for (int i = 0; i < 3; ++i) {
        const double r = rng.uniform(0.08, 0.25), h = rng.uniform(0.3, 1.2);
        const Vec3 base(rng.uniform(-half_w + 0.3, half_w - 0.3), floor_y, rng.uniform(z_near + 1.0, z_far - 0.3));
        s.push_back({Surface::CylinderSide, base, Vec3::Zero(), Vec3::Zero(), r, h});
        s.push_back({Surface::Disk, base - Vec3(0, h, 0), Vec3::Zero(), Vec3::Zero(), r, 0.0});
    }
    for (int i = 0; i < 2; ++i) {
        const double r = rng.uniform(0.1, 0.3);
        const Vec3 c(rng.uniform(-half_w + 0.3, half_w - 0.3), floor_y - r, rng.uniform(z_near + 1.0, z_far - 0.3));
        s.push_back({Surface::Sphere, c, Vec3::Zero(), Vec3::Zero(), r, 0.0});
    }
    // Shelves on the back and side walls.
    for (int i = 0; i < 3; ++i) {
        const double w = rng.uniform(0.3, 0.8), h = rng.uniform(0.1, 0.4), d = rng.uniform(0.15, 0.35);
        const double y = rng.uniform(ceil_y + 0.4, floor_y - 0.8);
        if (i == 0) {
            const double x = rng.uniform(-half_w + 0.1, half_w - 0.1 - w);
            add_box(s, {x, y, z_far - d}, {x + w, y + h, z_far});
        } else {
            const double z = rng.uniform(z_near + 0.5, z_far - 0.1 - w);
            const double x = i == 1 ? -half_w : half_w - d;
            add_box(s, {x, y, z}, {x + d, y + h, z + w});
        }
    }
    return s;
}

std::vector<Vec3> sample_surfaces(const std::vector<Surface>& surfaces, std::size_t n, Rng& rng) {
    std::vector<double> cdf;
    double total = 0.0;
    for (const auto& s : surfaces) cdf.push_back(total += s.area());
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        if (it == cdf.end()) --it;
        pts.push_back(surfaces[static_cast<std::size_t>(it - cdf.begin())].sample(rng));
    }
    return pts;
}

// Random Fourier features of world position: nearby surface points get similar descriptors.
struct DescriptorField {
    std::vector<Vec3> omega;
    std::vector<double> phase;

    DescriptorField(int dim, double bandwidth, Rng& rng) {
        for (int k = 0; k < dim; ++k) {
            omega.emplace_back(rng.normal() / bandwidth, rng.normal() / bandwidth, rng.normal() / bandwidth);
            phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
        }
    }

    FeatureMatrix describe(const std::vector<Vec3>& world, double noise, double corrupted, Rng& rng) const {
        const std::size_t dim = omega.size();
        const double scale = std::sqrt(2.0 / static_cast<double>(dim));
        FeatureMatrix out(world.size(), dim);
        for (std::size_t i = 0; i < world.size(); ++i) {
            auto row = out.row(i);
            for (std::size_t k = 0; k < dim; ++k)
                row[k] = scale * std::cos(omega[k].dot(world[i]) + phase[k]) + noise * rng.normal();
        }
        // Fisher-Yates prefix picks exactly round(corrupted·n) rows to replace with noise.
        std::vector<std::size_t> order(world.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto n_bad = static_cast<std::size_t>(std::llround(corrupted * static_cast<double>(world.size())));
        for (std::size_t i = 0; i < n_bad; ++i) {
            std::swap(order[i], order[i + rng.index(order.size() - i)]);
            auto row = out.row(order[i]);
            for (auto& v : row) v = rng.normal() / std::sqrt(static_cast<double>(dim));
        }
        return out;
    }
};

RigidTransform random_motion(Rng& rng, double max_deg, double max_m) {
    const Vec3 axis = rng.unit_vector();
    const double angle = rng.uniform(0.0, max_deg) * kDeg;
    const Vec3 t = rng.unit_vector() * rng.uniform(0.0, max_m);
    return {axis_angle(axis, angle), t};
}

}  // namespace

Scene generate_scene(const SceneParams& p) {
    p.validate();
    Rng rng(p.seed);
    auto surfaces = build_room(rng);
    for (auto& f : surfaces) {
        f.origin *= p.room_scale;
        f.e1 *= p.room_scale;
        f.e2 *= p.room_scale;
        f.radius *= p.room_scale;
        f.height *= p.room_scale;
    }

    // P takes the lowest fraction a of x-ranks, Q the highest; their shared band is
    // (2a − 1)/a of P, so a = 1/(2 − overlap).
    const double a = 1.0 / (2.0 - p.overlap);
    const auto total = static_cast<std::size_t>(std::ceil(static_cast<double>(p.point_count) / a));
    const auto world = sample_surfaces(surfaces, total, rng);

    std::vector<std::size_t> order(world.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return world[i].x() < world[j].x(); });
    std::vector<std::size_t> rank(world.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    const std::size_t per_cloud = std::min(p.point_count, total);

    std::vector<Vec3> ref_world, src_world;
    for (std::size_t i = 0; i < world.size(); ++i) {
        if (rank[i] < per_cloud) ref_world.push_back(world[i]);
        if (rank[i] >= total - per_cloud) src_world.push_back(world[i]);
    }

    Scene s;
    s.gt = random_motion(rng, p.gt_rotation_deg, p.gt_translation_m);
    const Mat3 dr = axis_angle(rng.unit_vector(), p.init_rotation_deg * kDeg);
    const Vec3 dt = rng.unit_vector() * p.init_translation_m;
    s.init = RigidTransform::from_approximate(dr * s.gt.rotation(), s.gt.translation() + dt, 1e-9);

    const DescriptorField field(p.descriptor_dim, p.descriptor_bandwidth, rng);
    s.ref_descriptors = field.describe(ref_world, p.descriptor_noise, p.corrupted_fraction, rng);
    s.src_descriptors = field.describe(src_world, p.descriptor_noise, p.corrupted_fraction, rng);

    auto jitter = [&](std::vector<Vec3>& pts) {
        if (p.noise_sigma == 0.0) return;
        for (auto& q : pts) q += Vec3(rng.normal(), rng.normal(), rng.normal()) * p.noise_sigma;
    };
    s.ref_points = ref_world;
    jitter(s.ref_points);
    s.src_points = apply_transform(invert(s.gt), src_world);
    jitter(s.src_points);
    return s;
}

ScenePaths scene_paths(const std::filesystem::path& dir, const std::string& name) {
    return {dir / (name + ".ref.ply"), dir / (name + ".src.ply"), dir / (name + ".gt.txt"), dir / (name + ".init.txt")};
}

ScenePaths write_scene(const Scene& scene, const std::filesystem::path& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
    const auto paths = scene_paths(dir, name);
    write_ply(paths.ref, scene.ref_points, &scene.ref_descriptors);
    write_ply(paths.src, scene.src_points, &scene.src_descriptors);
    write_pose(paths.gt, scene.gt);
    write_pose(paths.init, scene.init);
    return paths;
}

double measured_overlap(const std::vector<Vec3>& ref, const std::vector<Vec3>& src, const RigidTransform& gt,
                        double radius) {
    if (ref.empty() || src.empty()) return 0.0;
    const auto moved = apply_transform(gt, src);
    const SpatialIndex index(moved);
    std::size_t hits = 0;
    for (const auto& p : ref)
        if (index.nearest(p).distance < radius) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ref.size());
}

}  // namespace difreg
