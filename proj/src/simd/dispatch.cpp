#include <sdbf/simd/kernels.hpp>

#include <atomic>
#include <cstdlib>
#include <string>

namespace sdbf::simd {

namespace {

bool cpu_has_avx2() {
#if defined(SDBF_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("SDBF_SIMD"); env != nullptr && std::string(env) == "scalar") return Isa::Scalar;
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

ScopedIsa::ScopedIsa(Isa isa) : previous_(active_isa()) {
    current().store(isa_available(isa) ? isa : Isa::Scalar, std::memory_order_relaxed);
}

ScopedIsa::~ScopedIsa() { current().store(previous_, std::memory_order_relaxed); }

#if defined(SDBF_HAVE_AVX2)
#define SDBF_DISPATCH(fn, ...) \
    (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define SDBF_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

KernelSums gaussian_kernel_sums(std::span<const double> x, double x0, double inv_h) {
    return SDBF_DISPATCH(gaussian_kernel_sums, x, x0, inv_h);
}

void gaussian_kernel_values(std::span<const double> x, double x0, double inv_h, std::span<double> out) {
    SDBF_DISPATCH(gaussian_kernel_values, x, x0, inv_h, out);
}

Moments shifted_moments(std::span<const double> x, double shift) {
    return SDBF_DISPATCH(shifted_moments, x, shift);
}

#undef SDBF_DISPATCH

}  // namespace sdbf::simd
