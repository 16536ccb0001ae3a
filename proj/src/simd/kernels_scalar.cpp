#include <sdbf/simd/kernels.hpp>

#include <cmath>

namespace sdbf::simd::scalar {

KernelSums gaussian_kernel_sums(std::span<const double> x, double x0, double inv_h) {
    KernelSums s;
    for (double xi : x) {
        const double u = (xi - x0) * inv_h;
        const double k = std::exp(-0.5 * u * u);
        s.sum += k;
        s.sum_sq += k * k;
    }
    return s;
}

void gaussian_kernel_values(std::span<const double> x, double x0, double inv_h, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - x0) * inv_h;
        out[i] = std::exp(-0.5 * u * u);
    }
}

Moments shifted_moments(std::span<const double> x, double shift) {
    Moments m;
    for (double xi : x) {
        const double d = xi - shift;
        m.sum += d;
        m.sum_sq += d * d;
    }
    return m;
}

}  // namespace sdbf::simd::scalar
