// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <sdbf/simd/kernels.hpp>

#include <immintrin.h>

#include <cmath>

namespace sdbf::simd::avx2 {

namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93145751953125e-1;
constexpr double kLn2Lo = 1.42860682030941723212e-6;
constexpr double kExpFloor = -708.0;

// exp(x) for x <= 0, the only range the kernels need. Lanes below kExpFloor flush to 0.
// Cody-Waite reduction x = n*ln2 + r with |r| <= ln2/2, then a degree-12 Taylor
// polynomial (truncation error below 3e-16 relative).
inline __m256d exp_nonpositive(__m256d x) {
    const __m256d floor = _mm256_set1_pd(kExpFloor);
    const __m256d underflow = _mm256_cmp_pd(x, floor, _CMP_LT_OQ);
    x = _mm256_max_pd(x, floor);

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2e)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

    __m256d p = _mm256_set1_pd(1.0 / 479001600.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    // 2^n through the exponent field; n is in [-1022, 0] after the clamp.
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i bits = _mm256_cvtepi32_epi64(n32);
    bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
    const __m256d scaled = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, scaled);
}

inline __m256d neg_half_square(__m256d xi, __m256d x0, __m256d inv_h) {
    const __m256d u = _mm256_mul_pd(_mm256_sub_pd(xi, x0), inv_h);
    return _mm256_mul_pd(_mm256_set1_pd(-0.5), _mm256_mul_pd(u, u));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

KernelSums gaussian_kernel_sums(std::span<const double> x, double x0, double inv_h) {
    const __m256d vx0 = _mm256_set1_pd(x0);
    const __m256d vinv = _mm256_set1_pd(inv_h);
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d q0 = _mm256_setzero_pd(), q1 = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d k0 = exp_nonpositive(neg_half_square(_mm256_loadu_pd(x.data() + i), vx0, vinv));
        const __m256d k1 = exp_nonpositive(neg_half_square(_mm256_loadu_pd(x.data() + i + 4), vx0, vinv));
        s0 = _mm256_add_pd(s0, k0);
        s1 = _mm256_add_pd(s1, k1);
        q0 = _mm256_fmadd_pd(k0, k0, q0);
        q1 = _mm256_fmadd_pd(k1, k1, q1);
    }
    KernelSums out{hsum(_mm256_add_pd(s0, s1)), hsum(_mm256_add_pd(q0, q1))};
    for (; i < n; ++i) {
        const double u = (x[i] - x0) * inv_h;
        const double k = std::exp(-0.5 * u * u);
        out.sum += k;
        out.sum_sq += k * k;
    }
    return out;
}

void gaussian_kernel_values(std::span<const double> x, double x0, double inv_h, std::span<double> out) {
    const __m256d vx0 = _mm256_set1_pd(x0);
    const __m256d vinv = _mm256_set1_pd(inv_h);
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out.data() + i, exp_nonpositive(neg_half_square(_mm256_loadu_pd(x.data() + i), vx0, vinv)));
    }
    for (; i < n; ++i) {
        const double u = (x[i] - x0) * inv_h;
        out[i] = std::exp(-0.5 * u * u);
    }
}

Moments shifted_moments(std::span<const double> x, double shift) {
    const __m256d vshift = _mm256_set1_pd(shift);
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d q0 = _mm256_setzero_pd(), q1 = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), vshift);
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i + 4), vshift);
        s0 = _mm256_add_pd(s0, d0);
        s1 = _mm256_add_pd(s1, d1);
        q0 = _mm256_fmadd_pd(d0, d0, q0);
        q1 = _mm256_fmadd_pd(d1, d1, q1);
    }
    Moments m{hsum(_mm256_add_pd(s0, s1)), hsum(_mm256_add_pd(q0, q1))};
    for (; i < n; ++i) {
        const double d = x[i] - shift;
        m.sum += d;
        m.sum_sq += d * d;
    }
    return m;
}

void exp_inplace(std::span<double> x) {
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        _mm256_storeu_pd(x.data() + i, exp_nonpositive(_mm256_loadu_pd(x.data() + i)));
    }
    for (; i < x.size(); ++i) x[i] = x[i] < kExpFloor ? 0.0 : std::exp(x[i]);
}

}  // namespace sdbf::simd::avx2
