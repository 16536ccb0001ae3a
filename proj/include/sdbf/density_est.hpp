#pragma once

#include <sdbf/error.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <vector>

namespace sdbf {

/// Smallest sample accepted by the Monte Carlo estimators.
inline constexpr std::size_t kMinMcSamples = 100;
/// Largest tolerated fraction of non-finite integrand evaluations.
inline constexpr double kMaxNonFiniteFraction = 1e-3;

enum class KdeMode {
    Exact,       // sum of kernel contributions evaluated at the query point
    GridCompat,  // linear binning on a grid, Gaussian smoothing, linear interpolation
};

enum class StdErrorMethod {
    Bootstrap,   // i.i.d. resampling of the per-draw kernel contributions
    PlugIn,      // sd of kernel contributions / sqrt(n)
    BatchMeans,  // for autocorrelated (MCMC) input
};

struct DensityEstimate {
    double value = 0.0;
    double bandwidth = 0.0;
    std::size_t n_samples = 0;
    double std_error = 0.0;
    KdeMode mode = KdeMode::Exact;
    StdErrorMethod std_error_method = StdErrorMethod::PlugIn;
};

struct McEstimate {
    double value = 0.0;
    std::size_t n_samples = 0;
    double std_error = 0.0;
    std::size_t n_nonfinite = 0;
};

struct KdeOptions {
    KdeMode mode = KdeMode::Exact;
    StdErrorMethod std_error_method = StdErrorMethod::Bootstrap;
    std::size_t bootstrap_resamples = 200;
    /// Above this sample size the bootstrap is replaced by the plug-in error.
    std::size_t bootstrap_max_samples = 1'000'000;
    std::size_t batches = 50;
    std::uint64_t seed = 0;
    /// Overrides the rule-of-thumb bandwidth when set; must be positive.
    std::optional<double> bandwidth;
    std::size_t grid_points = 512;
};

/// Rule-of-thumb bandwidth 0.9 * min(sd, IQR/1.34) * n^(-1/5); falls back to sd when IQR is 0.
/// Throws EstimationError for fewer than two samples or zero spread.
double silverman_bandwidth(std::span<const double> samples);

/// Sample quantile with linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile(std::span<const double> samples, double prob);

/// Gaussian kernel density estimate at x0. Requires at least kMinMcSamples finite samples.
DensityEstimate kde_at_point(std::span<const double> samples, double x0, const KdeOptions& options = {});

/// Exact-mode estimate evaluated on each grid point with a fixed bandwidth.
std::vector<double> kde_on_grid(std::span<const double> samples, std::span<const double> grid, double bandwidth);

/// Running mean and variance (Welford) with Chan's parallel merge.
class MomentAccumulator {
public:
    void add(double x) {
        if (!std::isfinite(x)) {
            ++nonfinite_;
            return;
        }
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const MomentAccumulator& other);

    std::size_t count() const { return count_; }
    std::size_t nonfinite() const { return nonfinite_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; 0 for fewer than two values.
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }

private:
    std::size_t count_ = 0;
    std::size_t nonfinite_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Counts hits of a region test.
class ProportionAccumulator {
public:
    void add(bool hit) {
        ++count_;
        hits_ += hit ? 1 : 0;
    }
    void merge(const ProportionAccumulator& other) {
        count_ += other.count_;
        hits_ += other.hits_;
    }
    std::size_t count() const { return count_; }
    std::size_t hits() const { return hits_; }

private:
    std::size_t count_ = 0;
    std::size_t hits_ = 0;
};

/// value = hits / n, std_error = sqrt(p(1-p)/n).
McEstimate finish_probability(const ProportionAccumulator& acc);
/// Mean of the finite values with std_error = sd / sqrt(n). Throws EstimationError when
/// more than kMaxNonFiniteFraction of the evaluations were non-finite.
McEstimate finish_expectation(const MomentAccumulator& acc);

/// Fraction of samples satisfying `pred`.
template <std::ranges::input_range R, class Pred>
McEstimate mc_probability(const R& samples, Pred&& pred) {
    ProportionAccumulator acc;
    for (const auto& s : samples) acc.add(static_cast<bool>(pred(s)));
    if (acc.count() < kMinMcSamples) {
        throw EstimationError("mc_probability: need at least " + std::to_string(kMinMcSamples) + " samples");
    }
    return finish_probability(acc);
}

/// Arithmetic mean of `integrand` over the samples.
template <std::ranges::input_range R, class F>
McEstimate mc_expectation(const R& samples, F&& integrand) {
    MomentAccumulator acc;
    for (const auto& s : samples) acc.add(static_cast<double>(integrand(s)));
    if (acc.count() + acc.nonfinite() < kMinMcSamples) {
        throw EstimationError("mc_expectation: need at least " + std::to_string(kMinMcSamples) + " samples");
    }
    return finish_expectation(acc);
}

/// Same mean as mc_expectation, but the standard error comes from `batches`
/// contiguous batch means, which stays honest for autocorrelated chains.
template <std::ranges::random_access_range R, class F>
McEstimate mc_expectation_batched(const R& samples, F&& integrand, std::size_t batches) {
    const auto n = static_cast<std::size_t>(std::ranges::size(samples));
    if (n < kMinMcSamples) {
        throw EstimationError("mc_expectation: need at least " + std::to_string(kMinMcSamples) + " samples");
    }
    if (batches < 2 || batches > n) throw EstimationError("mc_expectation: batch count must be in [2, n]");
    MomentAccumulator total;
    MomentAccumulator batch_means;
    auto it = std::ranges::begin(samples);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        MomentAccumulator batch;
        for (std::size_t i = lo; i < hi; ++i) batch.add(static_cast<double>(integrand(it[static_cast<std::ptrdiff_t>(i)])));
        if (batch.count() > 0) batch_means.add(batch.mean());
        total.merge(batch);
    }
    McEstimate est = finish_expectation(total);
    est.std_error = std::sqrt(batch_means.variance() / static_cast<double>(batch_means.count()));
    return est;
}

}  // namespace sdbf
