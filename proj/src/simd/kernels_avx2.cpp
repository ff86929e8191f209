#include "difreg/simd/kernels.hpp"

#include <immintrin.h>

namespace difreg::simd {
namespace {

void squared_distances(const double* xs, const double* ys, const double* zs, std::size_t n,
                       double qx, double qy, double qz, double* out) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    const __m256d vqz = _mm256_set1_pd(qz);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vqz);
        const __m256d xy = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        _mm256_storeu_pd(out + i, _mm256_add_pd(xy, _mm256_mul_pd(dz, dz)));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        out[i] = (dx * dx + dy * dy) + dz * dz;
    }
}

inline __m256d row_apply(__m256d r0, __m256d r1, __m256d r2, __m256d t, __m256d x, __m256d y,
                         __m256d z, __m256d d) {
    __m256d acc = _mm256_add_pd(_mm256_mul_pd(r0, x), _mm256_mul_pd(r1, y));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(r2, z));
    return _mm256_sub_pd(_mm256_add_pd(acc, t), d);
}

void transformed_residuals_sq(const double* r, const double* t, const double* sx, const double* sy,
                              const double* sz, const double* dx, const double* dy, const double* dz,
                              std::size_t n, double* out) {
    __m256d rv[9];
    for (int k = 0; k < 9; ++k) rv[k] = _mm256_set1_pd(r[k]);
    const __m256d tx = _mm256_set1_pd(t[0]);
    const __m256d ty = _mm256_set1_pd(t[1]);
    const __m256d tz = _mm256_set1_pd(t[2]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(sx + i);
        const __m256d y = _mm256_loadu_pd(sy + i);
        const __m256d z = _mm256_loadu_pd(sz + i);
        const __m256d ex = row_apply(rv[0], rv[1], rv[2], tx, x, y, z, _mm256_loadu_pd(dx + i));
        const __m256d ey = row_apply(rv[3], rv[4], rv[5], ty, x, y, z, _mm256_loadu_pd(dy + i));
        const __m256d ez = row_apply(rv[6], rv[7], rv[8], tz, x, y, z, _mm256_loadu_pd(dz + i));
        const __m256d xy = _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));
        _mm256_storeu_pd(out + i, _mm256_add_pd(xy, _mm256_mul_pd(ez, ez)));
    }
    for (; i < n; ++i) {
        const double ex = ((r[0] * sx[i] + r[1] * sy[i]) + r[2] * sz[i]) + t[0] - dx[i];
        const double ey = ((r[3] * sx[i] + r[4] * sy[i]) + r[5] * sz[i]) + t[1] - dy[i];
        const double ez = ((r[6] * sx[i] + r[7] * sy[i]) + r[8] * sz[i]) + t[2] - dz[i];
        out[i] = (ex * ex + ey * ey) + ez * ez;
    }
}

void dot_rows(const double* a, const double* rows, std::size_t n, std::size_t dim, double* out) {
    const std::size_t blocks = dim / 4 * 4;
    for (std::size_t j = 0; j < n; ++j) {
        const double* b = rows + j * dim;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < blocks; k += 4)
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, acc);
        double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
        for (std::size_t k = blocks; k < dim; ++k) s = s + a[k] * b[k];
        out[j] = s;
    }
}

constexpr Kernels kAvx2{Isa::Avx2, &squared_distances, &transformed_residuals_sq, &dot_rows};

}  // namespace

const Kernels* detail::avx2_kernels() noexcept { return &kAvx2; }

}  // namespace difreg::simd
