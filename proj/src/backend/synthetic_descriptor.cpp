#include "difreg/backend/synthetic_descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "difreg/core/error.hpp"

namespace difreg {

int layer_stride(int layer_id) {
    if (layer_id < 0 || layer_id > 12) fail(ErrorCode::InvalidInput, "layer id must be within [0, 12]");
    return 64 >> std::min(layer_id / 3, 3);
}

int layer_grid_size(int raster_size, int layer_id) {
    const int s = layer_stride(layer_id);
    return std::max(1, (raster_size + s - 1) / s);
}

namespace {

// Metric slope (dz/dx, dz/dy) from central differences; false at holes and borders.
bool slope(const DepthMap& d, int u, int v, double& gx, double& gy) {
    if (u < 1 || v < 1 || u + 1 >= d.width() || v + 1 >= d.height()) return false;
    const double z = d.at(u, v);
    if (!(z > 0.0) || !d.valid(u - 1, v) || !d.valid(u + 1, v) || !d.valid(u, v - 1) || !d.valid(u, v + 1))
        return false;
    gx = (d.at(u + 1, v) - d.at(u - 1, v)) * 0.5 * d.intrinsics().fx / z;
    gy = (d.at(u, v + 1) - d.at(u, v - 1)) * 0.5 * d.intrinsics().fy / z;
    return true;
}

}  // namespace

std::vector<float> synthetic_descriptor_at(const DepthMap& d, int layer_id, double cu, double cv) {
    const int s = layer_stride(layer_id);
    const int u0 = std::max(0, static_cast<int>(std::ceil(cu - s)));
    const int u1 = std::min(d.width() - 1, static_cast<int>(std::floor(cu + s)));
    const int v0 = std::max(0, static_cast<int>(std::ceil(cv - s)));
    const int v1 = std::min(d.height() - 1, static_cast<int>(std::floor(cv + s)));

    std::vector<float> out(kSyntheticChannels, 0.0f);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t n = 0;
    for (int v = v0; v <= v1; ++v)
        for (int u = u0; u <= u1; ++u)
            if (d.valid(u, v)) {
                lo = std::min(lo, d.at(u, v));
                hi = std::max(hi, d.at(u, v));
                ++n;
            }
    if (n == 0) return out;

    // Offsets from the minimum keep a constant window exactly constant.
    double sum = 0.0;
    for (int v = v0; v <= v1; ++v)
        for (int u = u0; u <= u1; ++u)
            if (d.valid(u, v)) sum += d.at(u, v) - lo;
    const double mean_offset = sum / static_cast<double>(n);
    double var = 0.0;
    double hist[4] = {0, 0, 0, 0};
    for (int v = v0; v <= v1; ++v)
        for (int u = u0; u <= u1; ++u) {
            if (!d.valid(u, v)) continue;
            const double e = (d.at(u, v) - lo) - mean_offset;
            var += e * e;
            double gx = 0.0, gy = 0.0;
            if (!slope(d, u, v, gx, gy)) continue;
            const double mag = std::hypot(gx, gy);
            if (!(mag > 0.0)) continue;
            const double angle = std::atan2(gy, gx) + std::numbers::pi;
            const int bin = std::min(3, static_cast<int>(angle / (std::numbers::pi / 2.0)));
            hist[bin] += mag;
        }

    out[0] = static_cast<float>(lo + mean_offset);
    out[1] = static_cast<float>(std::sqrt(var / static_cast<double>(n)));
    out[2] = static_cast<float>(lo);
    out[3] = static_cast<float>(hi);
    for (int b = 0; b < 4; ++b) out[4 + b] = static_cast<float>(hist[b] / static_cast<double>(n));
    return out;
}

std::vector<FeatureMap> synthetic_descriptor(const DepthMap& d, std::span<const int> layers) {
    std::vector<FeatureMap> out;
    for (int layer : layers) {
        const int gh = layer_grid_size(d.height(), layer);
        const int gw = layer_grid_size(d.width(), layer);
        FeatureMap fm(gh, gw, kSyntheticChannels, layer, d.height(), d.width());
        for (int i = 0; i < gh; ++i) {
            const double cv = (i + 0.5) * d.height() / gh - 0.5;
            for (int j = 0; j < gw; ++j) {
                const double cu = (j + 0.5) * d.width() / gw - 0.5;
                const auto f = synthetic_descriptor_at(d, layer, cu, cv);
                std::copy(f.begin(), f.end(), fm.pixel(i, j).begin());
            }
        }
        out.push_back(std::move(fm));
    }
    return out;
}

}  // namespace difreg
