#include "support.hpp"

#include <sdbf/density_est.hpp>
#include <sdbf/error.hpp>
#include <sdbf/rng.hpp>
#include <sdbf/stats_dist.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace sdbf;

namespace {

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    return x;
}

const std::vector<double> kSmall = {3.1, -0.4, 2.2, 5.9, 0.0, 1.7, 8.8, -2.5, 4.4, 1.1, 0.6, 3.3};

}  // namespace

TEST_SUITE("density_est") {
    TEST_CASE("bandwidth and quantiles match numpy") {
        // numpy: 0.9 * min(std(ddof=1), iqr / 1.34) * n ** -0.2, quantile default method.
        CHECK(silverman_bandwidth(kSmall) == doctest::Approx(1.2768841131154038).epsilon(1e-13));
        CHECK(quantile(kSmall, 0.0) == doctest::Approx(-2.5));
        CHECK(quantile(kSmall, 0.1) == doctest::Approx(-0.36).epsilon(1e-13));
        CHECK(quantile(kSmall, 0.25) == doctest::Approx(0.45).epsilon(1e-13));
        CHECK(quantile(kSmall, 0.5) == doctest::Approx(1.95).epsilon(1e-13));
        CHECK(quantile(kSmall, 0.9) == doctest::Approx(5.75).epsilon(1e-13));
        CHECK(quantile(kSmall, 1.0) == doctest::Approx(8.8));
        CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>{1.0}), EstimationError);
        CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>(10, 2.0)), EstimationError);
    }

    TEST_CASE("kde on standard normal draws") {
        const auto x = normal_draws(1'000'000, 1);
        KdeOptions opts;
        opts.std_error_method = StdErrorMethod::PlugIn;
        const DensityEstimate d = kde_at_point(x, 0.0, opts);
        CHECK(d.value == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(0.01));
        CHECK(d.n_samples == x.size());
        CHECK(d.bandwidth > 0.0);
        CHECK(d.std_error > 0.0);

        opts.mode = KdeMode::GridCompat;
        const DensityEstimate g = kde_at_point(x, 0.0, opts);
        CHECK(g.value == doctest::Approx(d.value).epsilon(0.002));
        CHECK(g.bandwidth == d.bandwidth);
    }

    TEST_CASE("kde converges on analytic densities") {
        Rng rng(8);
        SUBCASE("student t") {
            std::vector<double> x(1'000'000);
            for (double& v : x) v = 0.25 * rng.normal() / std::sqrt(rng.chi_squared(2.0) / 2.0);
            for (double x0 : {-0.3, 0.0, 0.2}) {
                CHECK(kde_at_point(x, x0).value == doctest::Approx(student_t_pdf(x0, {2.0, 0.0, 0.25})).epsilon(0.02));
            }
        }
        SUBCASE("gamma shape 3 away from the boundary") {
            std::vector<double> x(1'000'000);
            for (double& v : x) v = rng.gamma(3.0);
            const auto pdf = [](double t) { return t * t * std::exp(-t) / 2.0; };
            for (double x0 : {1.0, 2.0, 4.0}) CHECK(kde_at_point(x, x0).value == doctest::Approx(pdf(x0)).epsilon(0.02));
        }
    }

    TEST_CASE("kde rejects bad input") {
        const auto x = normal_draws(1000, 2);
        KdeOptions zero;
        zero.bandwidth = 0.0;
        CHECK_THROWS_AS(kde_at_point(x, 0.0, zero), EstimationError);
        CHECK_THROWS_AS(kde_at_point(std::vector<double>(50, 1.0), 0.0), EstimationError);
        CHECK_THROWS_AS(kde_at_point(x, std::numeric_limits<double>::quiet_NaN()), EstimationError);
    }

    TEST_CASE("kde standard error methods agree on iid input") {
        const auto x = normal_draws(50'000, 3);
        KdeOptions o;
        o.std_error_method = StdErrorMethod::PlugIn;
        const double plug = kde_at_point(x, 0.5, o).std_error;
        o.std_error_method = StdErrorMethod::Bootstrap;
        o.seed = 4;
        const double boot = kde_at_point(x, 0.5, o).std_error;
        o.std_error_method = StdErrorMethod::BatchMeans;
        const double batch = kde_at_point(x, 0.5, o).std_error;
        CHECK(boot == doctest::Approx(plug).epsilon(0.25));
        CHECK(batch == doctest::Approx(plug).epsilon(0.4));
    }

    TEST_CASE("kde on grid matches pointwise evaluation") {
        const auto x = normal_draws(5000, 5);
        const double h = silverman_bandwidth(x);
        const std::vector<double> grid = {-1.0, 0.0, 0.5, 2.0};
        const auto y = kde_on_grid(x, grid, h);
        KdeOptions o;
        o.bandwidth = h;
        o.std_error_method = StdErrorMethod::PlugIn;
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(y[i] == doctest::Approx(kde_at_point(x, grid[i], o).value).epsilon(1e-12));
    }

    TEST_CASE("mc probability") {
        const auto x = normal_draws(10'000, 6);
        const McEstimate all = mc_probability(x, [](double) { return true; });
        CHECK(all.value == 1.0);
        CHECK(all.std_error == 0.0);

        const McEstimate half = mc_probability(x, [](double v) { return v > 0.0; });
        CHECK(half.value == doctest::Approx(0.5).epsilon(0.03));
        const double hits = half.value * static_cast<double>(half.n_samples);
        CHECK(hits == std::round(hits));

        auto shuffled = x;
        std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
        CHECK(mc_probability(shuffled, [](double v) { return v > 0.0; }).value == half.value);

        Rng rng(7);
        std::vector<double> c(100'000);
        for (double& v : c) v = sample_cauchy({0.0, 2.0}, rng);
        CHECK(mc_probability(c, [](double v) { return v > 0.0; }).value == doctest::Approx(0.5).epsilon(0.01));

        CHECK_THROWS_AS(mc_probability(std::vector<double>(10, 1.0), [](double) { return true; }), EstimationError);
    }

    TEST_CASE("mc expectation") {
        const auto x = normal_draws(10'000, 9);
        const McEstimate one = mc_expectation(x, [](double) { return 1.0; });
        CHECK(one.value == 1.0);
        CHECK(one.std_error == 0.0);

        const McEstimate ratio = mc_expectation(x, [](double v) { return normal_pdf(v, 0.0, 1.0) / normal_pdf(v, 0.0, 1.0); });
        CHECK(ratio.value == 1.0);

        std::vector<double> bad = x;
        for (std::size_t i = 0; i < 20; ++i) bad[i] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(mc_expectation(bad, [](double v) { return v; }), EstimationError);
        bad.assign(x.begin(), x.end());
        for (std::size_t i = 0; i < 5; ++i) bad[i] = std::numeric_limits<double>::infinity();
        const McEstimate tolerated = mc_expectation(bad, [](double v) { return v; });
        CHECK(tolerated.n_nonfinite == 5);
        CHECK(tolerated.n_samples == x.size() - 5);
    }

    TEST_CASE("standard error shrinks as n^-1/2") {
        const auto x = normal_draws(16 * 20'000, 10);
        const std::span<const double> all(x);
        const auto sq = [](double v) { return v * v; };
        const double se_small = mc_expectation(all.first(20'000), sq).std_error;
        const double se_large = mc_expectation(all, sq).std_error;
        CHECK(se_small / se_large == doctest::Approx(4.0).epsilon(0.25));

        KdeOptions o;
        o.std_error_method = StdErrorMethod::PlugIn;
        o.bandwidth = 0.2;
        const double k_small = kde_at_point(all.first(20'000), 0.0, o).std_error;
        const double k_large = kde_at_point(all, 0.0, o).std_error;
        CHECK(k_small / k_large == doctest::Approx(4.0).epsilon(0.25));
    }

    TEST_CASE("batch means see autocorrelation") {
        // AR(1) with coefficient 0.9: the iid error understates the true error by about sqrt(19).
        Rng rng(12);
        std::vector<double> x(200'000);
        double state = 0.0;
        for (double& v : x) {
            state = 0.9 * state + rng.normal();
            v = state;
        }
        const auto id = [](double v) { return v; };
        const McEstimate iid = mc_expectation(x, id);
        const McEstimate batched = mc_expectation_batched(x, id, 50);
        CHECK(batched.value == doctest::Approx(iid.value));
        CHECK(batched.std_error / iid.std_error == doctest::Approx(std::sqrt(19.0)).epsilon(0.35));
    }

    TEST_CASE("accumulators merge") {
        const auto x = normal_draws(1001, 13);
        MomentAccumulator whole, a, b;
        for (std::size_t i = 0; i < x.size(); ++i) {
            whole.add(x[i]);
            (i < 400 ? a : b).add(x[i]);
        }
        a.merge(b);
        CHECK(a.count() == whole.count());
        CHECK(a.mean() == doctest::Approx(whole.mean()).epsilon(1e-12));
        CHECK(a.variance() == doctest::Approx(whole.variance()).epsilon(1e-12));
        CHECK(whole.variance() == doctest::Approx(test::variance(x)).epsilon(1e-12));
    }
}
