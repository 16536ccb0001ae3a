#include "support.hpp"

#include <sdbf/app_multinomial.hpp>
#include <sdbf/error.hpp>

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>

using namespace sdbf;

namespace {

Vector alpha4(double a, double b, double c, double d) { return (Vector(4) << a, b, c, d).finished(); }

MultinomialTestConfig quick(std::size_t n, std::uint64_t seed) {
    MultinomialTestConfig c;
    c.n_mc = n;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_SUITE("app_multinomial") {
    TEST_CASE("conditional dirichlet parameters") {
        const MultinomialTestConfig c;
        const Vector post = c.posterior_alpha();
        CHECK(post == alpha4(316, 102, 109, 33));
        CHECK(conditional_dirichlet_params(post) == (Vector(3) << 316, 210, 33).finished());
        CHECK(conditional_dirichlet_params(Vector::Ones(4)) == Vector::Ones(3));
        CHECK_THROWS_AS(conditional_dirichlet_params(alpha4(1, 0.3, 0.4, 1)), InvalidParameter);
        CHECK_THROWS_AS(conditional_dirichlet_params(Vector::Ones(3)), InvalidParameter);
    }

    TEST_CASE("conditional posterior draws") {
        Rng rng(1);
        const Vector a = alpha4(316, 102, 109, 33);
        const Matrix g = conditional_posterior_draws(a, 100'000, rng);
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            REQUIRE(g(i, 1) == g(i, 2));
            REQUIRE(g.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
            REQUIRE((g.row(i).array() >= 0.0).all());
        }
        // gamma_2 = xi_2 / 2 with xi ~ Dirichlet(316, 210, 33).
        const double mean2 = g.col(1).mean();
        CHECK(mean2 == doctest::Approx(0.5 * 210.0 / 559.0).epsilon(0.002));
        CHECK(g.col(0).mean() == doctest::Approx(316.0 / 559.0).epsilon(0.002));
    }

    TEST_CASE("conditional draws match an epsilon-band rejection sampler") {
        const Vector a = alpha4(3, 2, 4, 2);
        Rng rng(2);
        const Matrix full = sample_dirichlet({a}, 1'000'000, rng);
        std::vector<double> band_g1, band_g4;
        for (Eigen::Index i = 0; i < full.rows(); ++i) {
            if (std::abs(full(i, 1) - full(i, 2)) < 0.003) {
                band_g1.push_back(full(i, 0));
                band_g4.push_back(full(i, 3));
            }
        }
        REQUIRE(band_g1.size() > 5000);
        Rng rng2(3);
        const Matrix cond = conditional_posterior_draws(a, 50'000, rng2);
        std::vector<double> c1(cond.col(0).begin(), cond.col(0).end());
        std::vector<double> c4(cond.col(3).begin(), cond.col(3).end());
        CHECK(test::ks_distance(band_g1, c1) < 0.03);
        CHECK(test::ks_distance(band_g4, c4) < 0.03);
        // Keeping alpha_2 + alpha_3 instead of alpha_2 + alpha_3 - 1 is visibly different.
        Rng rng3(4);
        const Matrix wrong = sample_dirichlet({(Vector(3) << 3, 6, 2).finished()}, 50'000, rng3);
        std::vector<double> w1(wrong.col(0).begin(), wrong.col(0).end());
        CHECK(test::ks_distance(band_g1, w1) > 0.03);
    }

    TEST_CASE("analytic theta_e density") {
        CHECK(analytic_theta_e_density(Vector::Ones(4)) == 1.5);
        CHECK(analytic_theta_e_density(alpha4(316, 102, 109, 33)) == doctest::Approx(13.714).epsilon(0.001));
        CHECK(std::exp(log_analytic_theta_e_density(alpha4(316, 102, 109, 33))) ==
              doctest::Approx(analytic_theta_e_density(alpha4(316, 102, 109, 33))).epsilon(1e-13));
        // numpy Monte Carlo at 4e6 draws agrees to about 1%.
        CHECK(analytic_theta_e_density(alpha4(1, 2, 2, 1)) == doctest::Approx(1.25).epsilon(1e-14));
        CHECK(analytic_theta_e_density(alpha4(2, 2, 2, 2)) == doctest::Approx(1.75).epsilon(1e-14));
        CHECK(analytic_theta_e_density(alpha4(4, 4, 4, 4)) == doctest::Approx(2.34375).epsilon(1e-14));
        double prev = 0.0;
        for (double a : {1.0, 2.0, 5.0, 20.0, 100.0, 1000.0}) {
            const double d = analytic_theta_e_density(alpha4(a, a, a, a));
            CHECK(d > prev);
            prev = d;
        }
        // Large alphas stay finite.
        CHECK(std::isfinite(analytic_theta_e_density(alpha4(1e6, 1e6, 1e6, 1e6))));
    }

    TEST_CASE("kde of theta_e samples near the analytic density") {
        const Vector a = alpha4(316, 102, 109, 33);
        const auto x = theta_e_samples(a, 1'000'000, 5, 1);
        CHECK(kde_at_point(x, 0.0).value == doctest::Approx(analytic_theta_e_density(a)).epsilon(0.02));
        CHECK(theta_e_samples(a, 1000, 5, 1) == theta_e_samples(a, 1000, 5, 1));
        CHECK(theta_e_samples(a, 1000, 5, 1) != theta_e_samples(a, 1000, 5, 2));
    }

    TEST_CASE("identical completed prior and integrand denominator") {
        // With SD(1,1,1) as the completed prior the expectation integrand is the order indicator.
        MultinomialTestConfig c = quick(200'000, 6);
        c.completed_prior = {1.0, 1.0, 1.0};
        const BayesFactorReport r = run_multinomial_test(c);
        const McEstimate& e = r.ingredients.prior_ratio_expectation;
        const double hits = e.value * static_cast<double>(e.n_samples);
        CHECK(hits == doctest::Approx(std::round(hits)).epsilon(1e-9));
        CHECK(e.value > 0.5);
    }

    TEST_CASE("conditional completed prior matches the order reduction") {
        MultinomialTestConfig c = quick(1'000'000, 7);
        c.completed_prior_is_conditional = true;
        const BayesFactorReport r = run_multinomial_test(c);
        const OrderReduction red = multinomial_order_reduction(c);
        CHECK(std::abs(r.bf_cu - red.bf) < 3.0 * std::hypot(r.bf_std_error, red.std_error));
    }

    TEST_CASE("counts against the order constraint") {
        MultinomialTestConfig c = quick(200'000, 8);
        c.counts = {250, 250, 250, 250};
        CHECK(run_multinomial_test(c).bf_cu < 1.0);
        c.counts = {32, 101, 108, 315};
        CHECK(run_multinomial_test(c).bf_cu < 1e-3);
    }

    TEST_CASE("report contents") {
        const BayesFactorReport r = run_multinomial_test(quick(100'000, 9));
        CHECK(r.analysis == "multinomial");
        CHECK(r.bf_cu > 50.0);
        CHECK(r.bf_cu < 200.0);
        CHECK(r.posterior_prob_c == doctest::Approx(r.bf_cu / (1.0 + r.bf_cu)).epsilon(1e-14));
        CHECK(test::has_flag_containing(r, "gamma_4"));
        CHECK(test::diagnostic(r, "conditional_posterior_alpha_2") == 210.0);
    }

    TEST_CASE("fixed chunking makes results independent of the worker count") {
        setenv("SDBF_THREADS", "1", 1);
        const BayesFactorReport a = run_multinomial_test(quick(50'000, 10));
        setenv("SDBF_THREADS", "3", 1);
        const BayesFactorReport b = run_multinomial_test(quick(50'000, 10));
        unsetenv("SDBF_THREADS");
        CHECK(a.bf_cu == b.bf_cu);
        CHECK(a.ingredients.posterior_density_at_re.value == b.ingredients.posterior_density_at_re.value);
    }

    TEST_CASE("fast mode is fast") {
        const auto t0 = std::chrono::steady_clock::now();
        run_multinomial_test(quick(100'000, 11));
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        CHECK(dt.count() < 5.0);
    }

    TEST_CASE("invalid configuration") {
        MultinomialTestConfig c;
        c.counts = {0, 0, 0, 0};
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c.counts = {1, -1, 2, 3};
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c = MultinomialTestConfig{};
        c.completed_prior.alpha2 = 0.0;
        CHECK_THROWS_AS(run_multinomial_test(c), InvalidParameter);
        c = MultinomialTestConfig{};
        c.n_mc = 10;
        CHECK_THROWS_AS(run_multinomial_test(c), InvalidParameter);
    }
}
