#include "difreg/features/feature_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "difreg/core/error.hpp"
#include "difreg/features/pca.hpp"

namespace difreg {
namespace {

// Bilinear blend at fractional grid position (y, x), clamped to the grid.
template <typename T>
void blend(const FeatureMap& fm, double y, double x, T* out) {
    y = std::clamp(y, 0.0, static_cast<double>(fm.height - 1));
    x = std::clamp(x, 0.0, static_cast<double>(fm.width - 1));
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const int y1 = std::min(y0 + 1, fm.height - 1);
    const int x1 = std::min(x0 + 1, fm.width - 1);
    const double wy = y - y0, wx = x - x0;
    const auto a = fm.pixel(y0, x0), b = fm.pixel(y0, x1), c = fm.pixel(y1, x0), d = fm.pixel(y1, x1);
    for (int k = 0; k < fm.channels; ++k) {
        const double top = a[k] + wx * (b[k] - a[k]);
        const double bottom = c[k] + wx * (d[k] - c[k]);
        out[k] = static_cast<T>(top + wy * (bottom - top));
    }
}

}  // namespace

FeatureMap upsample_bilinear(const FeatureMap& fm, int h, int w) {
    fm.validate();
    if (h < fm.height || w < fm.width) fail(ErrorCode::InvalidInput, "upsample_bilinear: target smaller than input");
    if (h == fm.height && w == fm.width) return fm;
    FeatureMap out(h, w, fm.channels, fm.layer_id, fm.source_height, fm.source_width);
    const double sy = h > 1 ? static_cast<double>(fm.height - 1) / (h - 1) : 0.0;
    const double sx = w > 1 ? static_cast<double>(fm.width - 1) / (w - 1) : 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) blend(fm, y * sy, x * sx, out.pixel(y, x).data());
    return out;
}

std::vector<FeatureMap> aggregate_layers_joint(std::span<const std::vector<FeatureMap>> images, int out_dim,
                                               PcaFit fit) {
    if (images.empty() || images.front().empty()) fail(ErrorCode::InvalidInput, "aggregate_layers: no feature maps");

    // layer id -> per-image position of that layer's map
    std::map<int, std::vector<const FeatureMap*>> by_layer;
    for (const auto& layers : images) {
        if (layers.size() != images.front().size())
            fail(ErrorCode::InvalidInput, "aggregate_layers: images carry different layer sets");
        for (const auto& m : layers) {
            if (m.source_height != layers.front().source_height || m.source_width != layers.front().source_width)
                fail(ErrorCode::InvalidInput, "aggregate_layers: maps come from different depth resolutions");
            by_layer[m.layer_id].push_back(&m);
        }
    }
    for (const auto& [layer, maps] : by_layer)
        if (maps.size() != images.size())
            fail(ErrorCode::InvalidInput, "aggregate_layers: layer " + std::to_string(layer) + " missing or duplicated");

    int target_h = 0, target_w = 0;
    for (const auto& m : images.front()) {
        target_h = std::max(target_h, m.height);
        target_w = std::max(target_w, m.width);
    }

    // reduced[image][layer ordinal]
    std::vector<std::vector<FeatureMap>> reduced(images.size());
    for (const auto& [layer, maps] : by_layer) {
        if (fit == PcaFit::JointPerPair) {
            const PcaBasis basis = fit_pca(maps, out_dim);
            for (std::size_t i = 0; i < maps.size(); ++i)
                reduced[i].push_back(upsample_bilinear(project_pca(*maps[i], basis), target_h, target_w));
        } else {
            for (std::size_t i = 0; i < maps.size(); ++i)
                reduced[i].push_back(upsample_bilinear(pca_reduce(*maps[i], out_dim), target_h, target_w));
        }
    }

    std::vector<FeatureMap> out;
    for (std::size_t i = 0; i < images.size(); ++i) {
        int channels = 0;
        for (const auto& m : reduced[i]) channels += m.channels;
        FeatureMap agg(target_h, target_w, channels, -1, images[i].front().source_height,
                       images[i].front().source_width);
        for (int y = 0; y < target_h; ++y)
            for (int x = 0; x < target_w; ++x) {
                float* dst = agg.pixel(y, x).data();
                for (const auto& m : reduced[i]) {
                    const auto src = m.pixel(y, x);
                    dst = std::copy(src.begin(), src.end(), dst);
                }
            }
        out.push_back(std::move(agg));
    }
    return out;
}

FeatureMap aggregate_layers(std::span<const FeatureMap> maps, int out_dim) {
    const std::vector<FeatureMap> image(maps.begin(), maps.end());
    return aggregate_layers_joint(std::span(&image, 1), out_dim).front();
}

std::vector<double> sample_at_pixel(const FeatureMap& fm, int depth_height, int depth_width, Pixel px) {
    if (depth_height <= 0 || depth_width <= 0) fail(ErrorCode::InvalidInput, "sample_at_pixel: bad depth size");
    const double y = (px.v + 0.5) * fm.height / depth_height - 0.5;
    const double x = (px.u + 0.5) * fm.width / depth_width - 0.5;
    std::vector<double> out(static_cast<std::size_t>(fm.channels));
    blend(fm, y, x, out.data());
    return out;
}

PointFeatures sample_point_features(const FeatureMap& fm, const PixelPointMap& ppm, int depth_height,
                                    int depth_width, std::span<const std::size_t> candidates) {
    if (ppm.width() != depth_width || ppm.height() != depth_height)
        fail(ErrorCode::InvalidInput, "sample_point_features: pixel map resolution differs from depth size");
    PointFeatures out;
    for (auto i : candidates) {
        if (i >= ppm.point_count() || !ppm.visible(i)) continue;
        const auto v = sample_at_pixel(fm, depth_height, depth_width, ppm.pixel_coords(ppm.pixel_of(i)));
        out.push_back(i, v);
    }
    if (out.empty()) out.vectors = FeatureMatrix(0, static_cast<std::size_t>(fm.channels));
    return out;
}

PointFeatures sample_point_features(const FeatureMap& fm, const PixelPointMap& ppm, int depth_height,
                                    int depth_width) {
    const auto visible = ppm.visible_points();
    return sample_point_features(fm, ppm, depth_height, depth_width, visible);
}

bool l2_normalize(std::span<double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (!(sq > 0.0) || !std::isfinite(sq)) {
        std::fill(v.begin(), v.end(), 0.0);
        return false;
    }
    const double norm = std::sqrt(sq);
    for (double& x : v) x /= norm;
    return true;
}

PointFeatures fuse_features(const PointFeatures& geo, const PointFeatures& diff) {
    if (geo.point_ids != diff.point_ids) fail(ErrorCode::InvalidInput, "fuse_features: point sets differ");
    PointFeatures out;
    out.point_ids = geo.point_ids;
    out.vectors = FeatureMatrix(geo.size(), geo.dim() + diff.dim());
    out.featureless.assign(geo.size(), 0);
    for (std::size_t i = 0; i < geo.size(); ++i) {
        auto row = out.vectors.row(i);
        const auto g = geo.vectors.row(i);
        const auto d = diff.vectors.row(i);
        std::copy(g.begin(), g.end(), row.begin());
        std::copy(d.begin(), d.end(), row.begin() + static_cast<std::ptrdiff_t>(g.size()));
        const bool ok_geo = l2_normalize(row.first(g.size()));
        const bool ok_diff = l2_normalize(row.subspan(g.size()));
        const bool flagged = (!geo.featureless.empty() && geo.featureless[i]) ||
                             (!diff.featureless.empty() && diff.featureless[i]);
        out.featureless[i] = (!ok_geo || !ok_diff || flagged) ? 1 : 0;
    }
    return out;
}

}  // namespace difreg
