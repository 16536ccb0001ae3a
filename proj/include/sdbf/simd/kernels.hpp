#pragma once

// Data-parallel reductions used by the density estimators. Each kernel has a
// scalar reference implementation and, where the CPU supports it, an AVX2+FMA
// variant. The variant is picked once at first use; SDBF_SIMD=scalar in the
// environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace sdbf::simd {

enum class Isa { Scalar, Avx2 };

struct KernelSums {
    double sum = 0.0;     // sum of exp(-u^2/2)
    double sum_sq = 0.0;  // sum of exp(-u^2)
};

struct Moments {
    double sum = 0.0;     // sum of (x - shift)
    double sum_sq = 0.0;  // sum of (x - shift)^2
};

/// Unnormalized Gaussian kernel sums with u = (x_i - x0) * inv_h.
KernelSums gaussian_kernel_sums(std::span<const double> x, double x0, double inv_h);

/// out[i] = exp(-u_i^2 / 2). `out` must be at least as long as `x`.
void gaussian_kernel_values(std::span<const double> x, double x0, double inv_h, std::span<double> out);

Moments shifted_moments(std::span<const double> x, double shift);

Isa active_isa();
bool isa_available(Isa isa);
std::string_view isa_name(Isa isa);

/// Forces an ISA for the lifetime of the object (tests and benchmarks).
class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa);
    ~ScopedIsa();
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;

private:
    Isa previous_;
};

namespace scalar {
KernelSums gaussian_kernel_sums(std::span<const double> x, double x0, double inv_h);
void gaussian_kernel_values(std::span<const double> x, double x0, double inv_h, std::span<double> out);
Moments shifted_moments(std::span<const double> x, double shift);
}  // namespace scalar

namespace avx2 {
KernelSums gaussian_kernel_sums(std::span<const double> x, double x0, double inv_h);
void gaussian_kernel_values(std::span<const double> x, double x0, double inv_h, std::span<double> out);
Moments shifted_moments(std::span<const double> x, double shift);
/// Vectorized exp over non-positive inputs, exposed for accuracy tests.
void exp_inplace(std::span<double> x);
}  // namespace avx2

}  // namespace sdbf::simd
