#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference and, on x86-64,
// an AVX2 variant; the active table is chosen once at startup from CPUID and can be
// overridden with DIFREG_ISA=scalar|avx2 or set_active_isa().
//
// The AVX2 variants use the same operation order as the scalar references (no FMA
// contraction, fixed lane-then-sequential reductions), so results are bit-identical.

#include <cstddef>
#include <string_view>

namespace difreg::simd {

enum class Isa { Scalar, Avx2 };

struct Kernels {
    Isa isa;

    // out[i] = (x[i]-qx)² + (y[i]-qy)² + (z[i]-qz)²
    void (*squared_distances)(const double* xs, const double* ys, const double* zs, std::size_t n,
                              double qx, double qy, double qz, double* out);

    // out[i] = ‖R·s_i + t − d_i‖², R row-major 3×3.
    void (*transformed_residuals_sq)(const double* rot, const double* trans, const double* sx,
                                     const double* sy, const double* sz, const double* dx,
                                     const double* dy, const double* dz, std::size_t n, double* out);

    // out[j] = <a, rows[j]> for j < n; rows is row-major n×dim.
    void (*dot_rows)(const double* a, const double* rows, std::size_t n, std::size_t dim, double* out);
};

bool isa_supported(Isa isa) noexcept;
std::string_view to_string(Isa isa) noexcept;

/// Kernel table for a specific ISA; throws InvalidInput if the CPU lacks it.
const Kernels& kernels_for(Isa isa);

const Kernels& active() noexcept;
Isa active_isa() noexcept;
void set_active_isa(Isa isa);

namespace detail {
const Kernels& scalar_kernels() noexcept;
const Kernels* avx2_kernels() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace difreg::simd
