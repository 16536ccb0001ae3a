#include "support.hpp"

#include <sdbf/app_mvt.hpp>
#include <sdbf/error.hpp>
#include <sdbf/mcmc.hpp>

#include <Eigen/LU>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sdbf;

namespace {

Matrix simulated_rows(Eigen::Index n, const Vector& mean, const Matrix& cov, std::uint64_t seed) {
    Rng rng(seed, 99);
    Matrix y(n, mean.size());
    for (Eigen::Index i = 0; i < n; ++i) y.row(i) = sample_mv_normal(mean, cov, rng).transpose();
    return y;
}

std::vector<double> col(const Matrix& m, Eigen::Index j) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
    return out;
}

}  // namespace

TEST_SUITE("mcmc") {
    TEST_CASE("lower triangle order is row major") {
        CHECK(lower_triangle_size(2) == 3);
        CHECK(lower_triangle_size(3) == 6);
        CHECK(lower_triangle_index(0) == std::pair<Eigen::Index, Eigen::Index>{0, 0});
        CHECK(lower_triangle_index(1) == std::pair<Eigen::Index, Eigen::Index>{1, 0});
        CHECK(lower_triangle_index(2) == std::pair<Eigen::Index, Eigen::Index>{1, 1});
        CHECK(lower_triangle_index(3) == std::pair<Eigen::Index, Eigen::Index>{2, 0});
        CHECK(lower_triangle_index(5) == std::pair<Eigen::Index, Eigen::Index>{2, 2});
    }

    TEST_CASE("default burn-in") {
        CHECK(default_burnin(1000) == 2000);
        CHECK(default_burnin(100'000) == 10'000);
    }

    TEST_CASE("data ingestion") {
        const MvtData d = MvtData::from_rows(mvt_fixture_data());
        CHECK(d.n == 36);
        CHECK(d.mean[0] == doctest::Approx(86.94).epsilon(1e-4));
        CHECK(d.mean[1] == doctest::Approx(193.47).epsilon(1e-4));
        const Matrix s = d.sample_covariance();
        CHECK(s(0, 0) == doctest::Approx(20197.0).epsilon(1e-4));
        CHECK(s(1, 0) == doctest::Approx(23515.0).epsilon(1e-4));
        CHECK(s(1, 1) == doctest::Approx(106350.0).epsilon(1e-4));

        Matrix constant = Matrix::Ones(10, 2);
        CHECK_THROWS_AS(MvtData::from_rows(constant), IngestionError);
        CHECK_THROWS_AS(MvtData::from_rows(Matrix::Ones(2, 2)), IngestionError);
        Matrix nan = mvt_fixture_data();
        nan(4, 1) = std::nan("");
        try {
            MvtData::from_rows(nan);
            FAIL("expected ingestion error");
        } catch (const IngestionError& e) {
            CHECK(e.line() == 5);
        }
    }

    TEST_CASE("delta conditional in one dimension") {
        // p = 1, Sigma = 1, Phi = s^2: N(n ybar / (s^-2 + n), 1 / (s^-2 + n)).
        const Matrix y = simulated_rows(15, Vector::Constant(1, 0.4), Matrix::Identity(1, 1), 1);
        const MvtData d = MvtData::from_rows(y);
        const double s2 = 0.3;
        MvtModelState st{Vector::Zero(1), Matrix::Identity(1, 1), Matrix::Constant(1, 1, s2)};
        Rng rng(4);
        std::vector<double> x(200'000);
        for (double& v : x) v = gibbs_delta_step(st, d, rng)[0];
        const double n = 15.0;
        const double mean = n * d.mean[0] / (1.0 / s2 + n);
        const double var = 1.0 / (1.0 / s2 + n);
        CHECK(test::mean(x) == doctest::Approx(mean).epsilon(0.01));
        CHECK(test::variance(x) == doctest::Approx(var).epsilon(0.01));
    }

    TEST_CASE("delta conditional limits") {
        const Matrix y = simulated_rows(40, (Vector(2) << 0.3, -0.2).finished(), Matrix::Identity(2, 2), 2);
        const MvtData d = MvtData::from_rows(y);
        const Matrix sigma = (Matrix(2, 2) << 1.0, 0.2, 0.2, 0.8).finished();
        // A huge Phi leaves the flat-prior mean zbar.
        MvtModelState st{Vector::Zero(2), sigma, 1e12 * Matrix::Identity(2, 2)};
        Rng rng(1);
        Vector m = Vector::Zero(2);
        const int n = 100'000;
        for (int i = 0; i < n; ++i) m += gibbs_delta_step(st, d, rng) / n;
        const Vector zbar = standardized_mean(d, sigma);
        CHECK((m - zbar).cwiseAbs().maxCoeff() < 4.0 * std::sqrt(1.0 / 40.0 / n));
    }

    TEST_CASE("phi conditional") {
        Rng rng(5);
        SUBCASE("one dimension is inverse gamma with shape 1") {
            // IG(1, b) has median b / ln 2 with b = (S0 + delta^2) / 2.
            const double s0 = 0.0625;
            const double delta = 0.4;
            std::vector<double> x(200'000);
            for (double& v : x) v = gibbs_phi_step(Vector::Constant(1, delta), Matrix::Constant(1, 1, s0), rng)(0, 0);
            std::nth_element(x.begin(), x.begin() + x.size() / 2, x.end());
            CHECK(x[x.size() / 2] == doctest::Approx((s0 + delta * delta) / 2.0 / std::numbers::ln2).epsilon(0.01));
        }
        SUBCASE("zero delta leaves IW(p + 1, S0)") {
            const Matrix s0 = (Matrix(2, 2) << 1.0, 0.3, 0.3, 2.0).finished();
            Matrix inv_mean = Matrix::Zero(2, 2);
            const int n = 100'000;
            for (int i = 0; i < n; ++i) inv_mean += gibbs_phi_step(Vector::Zero(2), s0, rng).inverse() / n;
            // Phi^-1 ~ Wishart(3, S0^-1) with mean 3 S0^-1.
            CHECK((inv_mean - 3.0 * s0.inverse()).cwiseAbs().maxCoeff() < 0.03);
        }
    }

    TEST_CASE("sigma metropolis guards") {
        const MvtData d = MvtData::from_rows(mvt_fixture_data());
        const Matrix sigma = d.sample_covariance();
        const Vector delta = (Vector(2) << 0.5, 0.5).finished();
        // Off-diagonal pushed past sqrt(s11 s22): not positive definite, never accepted.
        const SigmaUpdate bad = sigma_element_update(sigma, delta, d, 1, 1e6, 1e-300);
        CHECK_FALSE(bad.accepted);
        CHECK(bad.sigma == sigma);
        // Zero increment has R = 1.
        const SigmaUpdate same = sigma_element_update(sigma, delta, d, 2, 0.0, 0.999999);
        CHECK(same.accepted);
        CHECK(sigma_log_target(1e-8 * Matrix::Identity(2, 2), delta, d) == -std::numeric_limits<double>::infinity());
    }

    TEST_CASE("fixture chains") {
        const MvtData d = MvtData::from_rows(mvt_fixture_data());
        const MvtTestConfig fx = mvt_fixture_config();
        SamplerConfig u;
        u.n_draws = 40'000;
        u.rw_step_sds = fx.unconstrained_step_sds;
        u.initial_state = fx.unconstrained_init;
        u.prior_scale_matrix = 0.25 * Matrix::Identity(2, 2);
        u.seed = 123;
        const ChainOutput out = run_unconstrained_chain(d, u);
        for (double a : out.acceptance_rates) {
            CHECK(a > 0.1);
            CHECK(a < 0.6);
        }
        for (const Matrix& s : out.sigma_draws) REQUIRE(min_eigenvalue(s) > kPdEigenFloor);
        std::vector<double> theta_e(static_cast<std::size_t>(out.delta_draws.rows()));
        for (std::size_t i = 0; i < theta_e.size(); ++i) {
            theta_e[i] = out.delta_draws(static_cast<Eigen::Index>(i), 0) - out.delta_draws(static_cast<Eigen::Index>(i), 1);
        }
        CHECK(kde_at_point(theta_e, 0.0).value == doctest::Approx(0.9871618).epsilon(0.1));

        SamplerConfig c;
        c.n_draws = 40'000;
        c.rw_step_sds = fx.constrained_step_sds;
        c.initial_state = fx.constrained_init;
        c.prior_scale_matrix = Matrix::Constant(1, 1, 0.0625);
        c.seed = 123;
        const ChainOutput cout = run_constrained_chain(d, c);
        const auto delta = col(cout.delta_draws, 0);
        const McEstimate ratio = mc_expectation(delta, [](double x) {
            return x > 0.0 ? cauchy_pdf(x, {0.0, 0.5}) / cauchy_pdf(x, {0.0, 0.25}) : 0.0;
        });
        CHECK(ratio.value == doctest::Approx(1.098799).epsilon(0.1));
        CHECK(mc_probability(delta, [](double x) { return x > 0.0; }).value > 0.99);
    }

    TEST_CASE("prior-only chains reproduce the cauchy priors") {
        const MvtData d = MvtData::from_rows(mvt_fixture_data());
        SamplerConfig u;
        u.n_draws = 100'000;
        u.prior_scale_matrix = 0.25 * Matrix::Identity(2, 2);
        u.hooks.prior_only = true;
        u.seed = 9;
        const ChainOutput out = run_unconstrained_chain(d, u);
        for (Eigen::Index j = 0; j < 2; ++j) {
            CHECK(test::ks_distance(col(out.delta_draws, j), [](double t) { return cauchy_cdf(t, {0.0, 0.5}); }) < 0.02);
        }

        SamplerConfig c;
        c.n_draws = 100'000;
        c.prior_scale_matrix = Matrix::Constant(1, 1, 0.0625);
        c.hooks.prior_only = true;
        c.seed = 9;
        const ChainOutput cout = run_constrained_chain(d, c);
        CHECK(test::ks_distance(col(cout.delta_draws, 0), [](double t) { return cauchy_cdf(t, {0.0, 0.25}); }) < 0.02);

        // The implied conditional prior, Student t with 2 df and scale 0.25, as IW(2, 0.125).
        c.prior_scale_matrix = Matrix::Constant(1, 1, 0.125);
        c.prior_df = 2.0;
        const ChainOutput tout = run_constrained_chain(d, c);
        CHECK(test::ks_distance(col(tout.delta_draws, 0), [](double t) { return student_t_cdf(t, {2.0, 0.0, 0.25}); }) < 0.02);
    }

    TEST_CASE("conjugate subcase") {
        // Sigma fixed at I and a fixed normal prior N(0, Phi): closed-form normal posterior.
        const Matrix y = simulated_rows(25, (Vector(2) << 0.5, 0.1).finished(), Matrix::Identity(2, 2), 3);
        const MvtData d = MvtData::from_rows(y);
        const Matrix phi = (Matrix(2, 2) << 0.4, 0.1, 0.1, 0.3).finished();
        SamplerConfig cfg;
        cfg.n_draws = 100'000;
        cfg.n_burnin = 10;
        cfg.prior_scale_matrix = phi;
        cfg.hooks.fixed_sigma = Matrix::Identity(2, 2);
        cfg.hooks.fixed_phi = phi;
        cfg.seed = 31;
        const ChainOutput out = run_unconstrained_chain(d, cfg);

        const double n = 25.0;
        const Matrix cov = (phi.inverse() + n * Matrix::Identity(2, 2)).inverse();
        const Vector mean = cov * (n * d.mean);
        const double draws = static_cast<double>(cfg.n_draws);
        // Two-sided 95% over the three covariance entries (Bonferroni), i.e. 2 SE family-wise.
        const double z_cov = 2.394;
        for (Eigen::Index j = 0; j < 2; ++j) {
            const auto x = col(out.delta_draws, j);
            CHECK(std::abs(test::mean(x) - mean[j]) < 2.0 * std::sqrt(cov(j, j) / draws));
            // Var of the sample variance of normal draws is 2 sigma^4 / (n - 1).
            CHECK(std::abs(test::variance(x) - cov(j, j)) < z_cov * cov(j, j) * std::sqrt(2.0 / (draws - 1.0)));
        }
        const Vector m = out.delta_draws.colwise().mean();
        const Matrix c = (out.delta_draws.rowwise() - m.transpose()).transpose() * (out.delta_draws.rowwise() - m.transpose()) / (draws - 1.0);
        const double se_cov = std::sqrt((cov(0, 0) * cov(1, 1) + cov(0, 1) * cov(0, 1)) / draws);
        CHECK(std::abs(c(0, 1) - cov(0, 1)) < z_cov * se_cov);
    }

    TEST_CASE("constrained conditional pools 2n observations") {
        // With Sigma = I and phi fixed, delta_vec = delta (1, 1) has posterior precision 1/phi + 2n.
        const Matrix y = simulated_rows(20, (Vector(2) << 0.3, 0.5).finished(), Matrix::Identity(2, 2), 4);
        const MvtData d = MvtData::from_rows(y);
        const double phi = 0.2;
        const MvtModelState st{Vector::Zero(1), Matrix::Identity(2, 2), Matrix::Constant(1, 1, phi)};
        const ScalarNormal c = constrained_delta_conditional(st, d, Vector::Ones(2));
        const double n = 20.0;
        CHECK(c.variance == doctest::Approx(1.0 / (1.0 / phi + 2.0 * n)));
        CHECK(c.mean == doctest::Approx(n * (d.mean[0] + d.mean[1]) / (1.0 / phi + 2.0 * n)));

        // Brute-force posterior of the common effect on a grid: prior N(0, phi) times the likelihood.
        double z0 = 0.0, z1 = 0.0, z2 = 0.0;
        for (double t = -3.0; t <= 3.0; t += 1e-5) {
            const double ll = -0.5 * (d.scatter.trace() + n * ((d.mean.array() - t).square().sum()));
            const double w = std::exp(ll - t * t / (2.0 * phi) + 0.5 * d.scatter.trace());
            z0 += w;
            z1 += w * t;
            z2 += w * t * t;
        }
        const double grid_mean = z1 / z0;
        const double grid_var = z2 / z0 - grid_mean * grid_mean;
        CHECK(c.mean == doctest::Approx(grid_mean).epsilon(1e-6));
        CHECK(c.variance == doctest::Approx(grid_var).epsilon(1e-6));
        // The single-n variance reading disagrees with the brute-force posterior.
        CHECK(std::abs(1.0 / (1.0 / phi + n) - grid_var) > 0.5 * grid_var);

        SamplerConfig cfg;
        cfg.n_draws = 100'000;
        cfg.n_burnin = 10;
        cfg.prior_scale_matrix = Matrix::Constant(1, 1, phi);
        cfg.hooks.fixed_sigma = Matrix::Identity(2, 2);
        cfg.hooks.fixed_phi = Matrix::Constant(1, 1, phi);
        cfg.seed = 8;
        const auto x = col(run_constrained_chain(d, cfg).delta_draws, 0);
        CHECK(std::abs(test::mean(x) - grid_mean) < 2.0 * std::sqrt(grid_var / 1e5));
        CHECK(test::variance(x) == doctest::Approx(grid_var).epsilon(0.02));
    }

    TEST_CASE("seed determinism") {
        const MvtData d = MvtData::from_rows(mvt_fixture_data());
        SamplerConfig cfg;
        cfg.n_draws = 3000;
        cfg.prior_scale_matrix = 0.25 * Matrix::Identity(2, 2);
        cfg.seed = 77;
        const ChainOutput a = run_unconstrained_chain(d, cfg);
        const ChainOutput b = run_unconstrained_chain(d, cfg);
        CHECK(a.delta_draws == b.delta_draws);
        CHECK(a.sigma_draws.back() == b.sigma_draws.back());
        CHECK(a.phi_draws.back() == b.phi_draws.back());
        CHECK(a.step_sds == b.step_sds);
        cfg.seed = 78;
        CHECK(run_unconstrained_chain(d, cfg).delta_draws != a.delta_draws);
    }

    TEST_CASE("adaptive steps land near the target acceptance") {
        const MvtData d = MvtData::from_rows(mvt_fixture_data());
        SamplerConfig cfg;
        cfg.n_draws = 20'000;
        cfg.n_burnin = 10'000;
        cfg.prior_scale_matrix = 0.25 * Matrix::Identity(2, 2);
        cfg.seed = 5;
        const ChainOutput out = run_unconstrained_chain(d, cfg);
        for (double a : out.acceptance_rates) CHECK(a == doctest::Approx(kTargetAcceptance).epsilon(0.35));
    }

    TEST_CASE("configuration errors") {
        const MvtData d = MvtData::from_rows(mvt_fixture_data());
        SamplerConfig cfg;
        cfg.prior_scale_matrix = Matrix::Identity(3, 3);
        CHECK_THROWS_AS(run_unconstrained_chain(d, cfg), InvalidParameter);
        cfg.prior_scale_matrix = Matrix::Identity(2, 2);
        cfg.rw_step_sds = {1.0, 2.0};
        CHECK_THROWS_AS(run_unconstrained_chain(d, cfg), InvalidParameter);
        cfg.rw_step_sds = {1.0, -2.0, 1.0};
        CHECK_THROWS_AS(run_unconstrained_chain(d, cfg), InvalidParameter);
    }
}
