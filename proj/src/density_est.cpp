#include <sdbf/density_est.hpp>

#include <sdbf/rng.hpp>
#include <sdbf/simd/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sdbf {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

void require_samples(std::span<const double> samples, const char* what) {
    if (samples.size() < kMinMcSamples) {
        throw EstimationError(std::string(what) + ": need at least " + std::to_string(kMinMcSamples) + " samples, got " +
                              std::to_string(samples.size()));
    }
    for (double x : samples) {
        if (!std::isfinite(x)) throw EstimationError(std::string(what) + ": samples must be finite");
    }
}

double sample_sd(std::span<const double> samples) {
    const auto m = simd::shifted_moments(samples, samples.front());
    const auto n = static_cast<double>(samples.size());
    const double var = (m.sum_sq - m.sum * m.sum / n) / (n - 1.0);
    return std::sqrt(std::max(var, 0.0));
}

// Linear binning of unit-mass samples onto `points` equally spaced nodes over [lo, hi].
std::vector<double> bin_linear(std::span<const double> x, double lo, double hi, std::size_t points) {
    std::vector<double> y(points, 0.0);
    const double delta = (hi - lo) / static_cast<double>(points - 1);
    const double w = 1.0 / static_cast<double>(x.size());
    const auto last = static_cast<std::ptrdiff_t>(points) - 1;
    for (double xi : x) {
        const double pos = (xi - lo) / delta;
        const auto ix = static_cast<std::ptrdiff_t>(std::floor(pos));
        const double fx = pos - static_cast<double>(ix);
        if (ix >= 0 && ix < last) {
            y[static_cast<std::size_t>(ix)] += w * (1.0 - fx);
            y[static_cast<std::size_t>(ix + 1)] += w * fx;
        } else if (ix == -1) {
            y[0] += w * fx;
        } else if (ix == last) {
            y[static_cast<std::size_t>(ix)] += w * (1.0 - fx);
        }
    }
    return y;
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
    if (x < xs.front() || x > xs.back()) return 0.0;
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return ys.back();
    const auto j = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

// Mirrors R's density() with default (pre-4.4) coordinates: binning on
// [min - 7h, max + 7h], circular Gaussian smoothing whose lag spacing is
// 2(up - lo)/(2m - 1), interpolation to the user grid [min - 3h, max + 3h],
// then linear interpolation at x0.
double kde_grid_compat(std::span<const double> x, double x0, double h, std::size_t m) {
    const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
    const double from = *min_it - 3.0 * h;
    const double to = *max_it + 3.0 * h;
    const double lo = from - 4.0 * h;
    const double up = to + 4.0 * h;

    const std::vector<double> y = bin_linear(x, lo, up, m);
    const double lag = 2.0 * (up - lo) / static_cast<double>(2 * m - 1);
    std::vector<double> kernel(m);
    for (std::size_t d = 0; d < m; ++d) {
        const double u = static_cast<double>(d) * lag / h;
        kernel[d] = kInvSqrt2Pi / h * std::exp(-0.5 * u * u);
    }
    std::vector<double> smoothed(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += y[i] * kernel[i > j ? i - j : j - i];
        smoothed[j] = std::max(s, 0.0);
    }

    std::vector<double> xords(m), user_x(m), user_y(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(m - 1);
        xords[j] = lo + t * (up - lo);
        user_x[j] = from + t * (to - from);
    }
    for (std::size_t j = 0; j < m; ++j) user_y[j] = interpolate(xords, smoothed, user_x[j]);
    return interpolate(user_x, user_y, x0);
}

double bootstrap_std_error(std::span<const double> contributions, std::size_t resamples, std::uint64_t seed) {
    Rng rng(seed, 0x6b6465);
    const std::uint64_t n = contributions.size();
    MomentAccumulator means;
    for (std::size_t b = 0; b < resamples; ++b) {
        double s = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>((static_cast<unsigned __int128>(rng.next_u64()) * n) >> 64);
            s += contributions[idx];
        }
        means.add(s / static_cast<double>(n));
    }
    return std::sqrt(means.variance());
}

double batch_means_std_error(std::span<const double> contributions, std::size_t batches) {
    const std::size_t n = contributions.size();
    batches = std::clamp<std::size_t>(batches, 2, n);
    MomentAccumulator means;
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += contributions[i];
        means.add(s / static_cast<double>(hi - lo));
    }
    return std::sqrt(means.variance() / static_cast<double>(means.count()));
}

}  // namespace

double quantile(std::span<const double> samples, double prob) {
    if (samples.empty()) throw EstimationError("quantile: empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw EstimationError("quantile: probability outside [0, 1]");
    std::vector<double> v(samples.begin(), samples.end());
    const double h = static_cast<double>(v.size() - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double x_lo = v[lo];
    if (lo + 1 >= v.size()) return x_lo;
    const double x_hi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    return x_lo + (h - static_cast<double>(lo)) * (x_hi - x_lo);
}

double silverman_bandwidth(std::span<const double> samples) {
    if (samples.size() < 2) throw EstimationError("bandwidth: need at least two samples");
    const double sd = sample_sd(samples);
    if (!(sd > 0.0)) throw EstimationError("bandwidth: samples have zero variance");
    const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityEstimate kde_at_point(std::span<const double> samples, double x0, const KdeOptions& options) {
    require_samples(samples, "kde_at_point");
    if (!std::isfinite(x0)) throw EstimationError("kde_at_point: query point must be finite");
    double h = 0.0;
    if (options.bandwidth) {
        h = *options.bandwidth;
        if (!(h > 0.0) || !std::isfinite(h)) throw EstimationError("kde_at_point: bandwidth must be positive");
    } else {
        h = silverman_bandwidth(samples);
    }

    const auto n = static_cast<double>(samples.size());
    const double norm = kInvSqrt2Pi / h;
    const auto sums = simd::gaussian_kernel_sums(samples, x0, 1.0 / h);

    DensityEstimate est;
    est.bandwidth = h;
    est.n_samples = samples.size();
    est.mode = options.mode;
    est.value = options.mode == KdeMode::Exact ? norm * sums.sum / n
                                               : kde_grid_compat(samples, x0, h, std::max<std::size_t>(options.grid_points, 2));

    StdErrorMethod method = options.std_error_method;
    if (method == StdErrorMethod::Bootstrap && samples.size() > options.bootstrap_max_samples) method = StdErrorMethod::PlugIn;
    est.std_error_method = method;
    if (method == StdErrorMethod::PlugIn) {
        const double var = std::max(0.0, (sums.sum_sq - sums.sum * sums.sum / n) / (n - 1.0));
        est.std_error = norm * std::sqrt(var / n);
    } else {
        std::vector<double> contributions(samples.size());
        simd::gaussian_kernel_values(samples, x0, 1.0 / h, contributions);
        const double se = method == StdErrorMethod::Bootstrap
                              ? bootstrap_std_error(contributions, options.bootstrap_resamples, options.seed)
                              : batch_means_std_error(contributions, options.batches);
        est.std_error = norm * se;
    }
    return est;
}

std::vector<double> kde_on_grid(std::span<const double> samples, std::span<const double> grid, double bandwidth) {
    require_samples(samples, "kde_on_grid");
    if (!(bandwidth > 0.0)) throw EstimationError("kde_on_grid: bandwidth must be positive");
    const double norm = kInvSqrt2Pi / bandwidth / static_cast<double>(samples.size());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double g : grid) out.push_back(norm * simd::gaussian_kernel_sums(samples, g, 1.0 / bandwidth).sum);
    return out;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    nonfinite_ += other.nonfinite_;
    if (other.count_ == 0) return;
    if (count_ == 0) {
        count_ = other.count_;
        mean_ = other.mean_;
        m2_ = other.m2_;
        return;
    }
    const auto na = static_cast<double>(count_);
    const auto nb = static_cast<double>(other.count_);
    const double delta = other.mean_ - mean_;
    const double total = na + nb;
    mean_ += delta * nb / total;
    m2_ += other.m2_ + delta * delta * na * nb / total;
    count_ += other.count_;
}

McEstimate finish_probability(const ProportionAccumulator& acc) {
    McEstimate est;
    est.n_samples = acc.count();
    if (acc.count() == 0) return est;
    const auto n = static_cast<double>(acc.count());
    est.value = static_cast<double>(acc.hits()) / n;
    est.std_error = std::sqrt(est.value * (1.0 - est.value) / n);
    return est;
}

McEstimate finish_expectation(const MomentAccumulator& acc) {
    McEstimate est;
    est.n_samples = acc.count();
    est.n_nonfinite = acc.nonfinite();
    const std::size_t total = acc.count() + acc.nonfinite();
    if (total == 0) throw EstimationError("mc_expectation: no samples");
    if (static_cast<double>(acc.nonfinite()) > kMaxNonFiniteFraction * static_cast<double>(total)) {
        throw EstimationError("mc_expectation: " + std::to_string(acc.nonfinite()) + " of " + std::to_string(total) +
                              " integrand evaluations were non-finite");
    }
    est.value = acc.mean();
    est.std_error = acc.count() > 0 ? std::sqrt(acc.variance() / static_cast<double>(acc.count())) : 0.0;
    return est;
}

}  // namespace sdbf
