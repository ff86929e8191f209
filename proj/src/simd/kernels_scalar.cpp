#include "difreg/simd/kernels.hpp"

namespace difreg::simd {
namespace {

void squared_distances(const double* xs, const double* ys, const double* zs, std::size_t n,
                       double qx, double qy, double qz, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        out[i] = (dx * dx + dy * dy) + dz * dz;
    }
}

void transformed_residuals_sq(const double* r, const double* t, const double* sx, const double* sy,
                              const double* sz, const double* dx, const double* dy, const double* dz,
                              std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = ((r[0] * sx[i] + r[1] * sy[i]) + r[2] * sz[i]) + t[0] - dx[i];
        const double ey = ((r[3] * sx[i] + r[4] * sy[i]) + r[5] * sz[i]) + t[1] - dy[i];
        const double ez = ((r[6] * sx[i] + r[7] * sy[i]) + r[8] * sz[i]) + t[2] - dz[i];
        out[i] = (ex * ex + ey * ey) + ez * ez;
    }
}

// Four interleaved partial sums reduced in lane order, then the tail; mirrors the
// AVX2 accumulator layout exactly.
double dot(const double* a, const double* b, std::size_t dim) {
    double lanes[4] = {0, 0, 0, 0};
    std::size_t k = 0;
    for (; k + 4 <= dim; k += 4)
        for (int l = 0; l < 4; ++l) lanes[l] = lanes[l] + a[k + l] * b[k + l];
    double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
    for (; k < dim; ++k) s = s + a[k] * b[k];
    return s;
}

void dot_rows(const double* a, const double* rows, std::size_t n, std::size_t dim, double* out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = dot(a, rows + j * dim, dim);
}

constexpr Kernels kScalar{Isa::Scalar, &squared_distances, &transformed_residuals_sq, &dot_rows};

}  // namespace

const Kernels& detail::scalar_kernels() noexcept { return kScalar; }

}  // namespace difreg::simd
