#include <atomic>
#include <cstdlib>
#include <string>

#include "difreg/core/error.hpp"
#include "difreg/core/log.hpp"
#include "difreg/simd/kernels.hpp"

namespace difreg::simd {

#ifndef DIFREG_HAVE_AVX2
const Kernels* detail::avx2_kernels() noexcept { return nullptr; }
#endif

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(DIFREG_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

const Kernels& kernels_for(Isa isa) {
    if (!isa_supported(isa)) fail(ErrorCode::InvalidInput, "ISA not available: " + std::string(to_string(isa)));
    if (isa == Isa::Avx2) return *detail::avx2_kernels();
    return detail::scalar_kernels();
}

namespace {

const Kernels* initial_table() {
    if (const char* env = std::getenv("DIFREG_ISA")) {
        const std::string want(env);
        if (want == "scalar") return &detail::scalar_kernels();
        if (want == "avx2" && isa_supported(Isa::Avx2)) return detail::avx2_kernels();
        log::warn("DIFREG_ISA=" + want + " not available, using CPU detection");
    }
    if (isa_supported(Isa::Avx2)) return detail::avx2_kernels();
    return &detail::scalar_kernels();
}

std::atomic<const Kernels*>& table() {
    static std::atomic<const Kernels*> t{initial_table()};
    return t;
}

}  // namespace

const Kernels& active() noexcept { return *table().load(std::memory_order_acquire); }
Isa active_isa() noexcept { return active().isa; }
void set_active_isa(Isa isa) { table().store(&kernels_for(isa), std::memory_order_release); }

}  // namespace difreg::simd
