#include <sdbf/cli/validate.hpp>

#include <sdbf/app_multinomial.hpp>
#include <sdbf/bayes_factor.hpp>
#include <sdbf/density_est.hpp>
#include <sdbf/error.hpp>
#include <sdbf/mcmc.hpp>
#include <sdbf/simd/kernels.hpp>
#include <sdbf/stats_dist.hpp>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

namespace sdbf::cli {

namespace {

CheckResult within(std::string name, double value, double reference, double std_error, double tolerance, std::string detail = {}) {
    CheckResult r;
    r.name = std::move(name);
    r.value = value;
    r.reference = reference;
    r.std_error = std_error;
    r.tolerance = tolerance;
    r.passed = std::isfinite(value) && std::abs(value - reference) <= tolerance;
    r.detail = std::move(detail);
    return r;
}

// Runs `body`; a library error turns into a failed check carrying the message.
CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        CheckResult r;
        r.name = name;
        r.passed = false;
        r.value = std::nan("");
        r.detail = e.what();
        return r;
    }
}

double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

std::vector<double> synthetic_normal(std::size_t n, double mean, double sd, std::uint64_t seed) {
    Rng rng(seed, 0x7379);
    std::vector<double> y(n);
    for (double& v : y) v = mean + sd * rng.normal();
    return y;
}

CheckResult check_kde(const ValidateOptions& o) {
    return guarded("kde_standard_normal", [&] {
        const std::size_t n = o.fast ? 20'000 : 200'000;
        Rng rng(o.seed, 0x6b);
        std::vector<double> x(n);
        for (double& v : x) v = rng.normal();
        KdeOptions opts;
        opts.std_error_method = StdErrorMethod::PlugIn;
        if (o.fault == Fault::KdeZeroBandwidth) opts.bandwidth = 0.0;
        const DensityEstimate d = kde_at_point(x, 0.0, opts);
        // A Gaussian kernel on N(0, 1) draws estimates the N(0, 1 + h^2) density.
        const double ref = 1.0 / std::sqrt(2.0 * std::numbers::pi * (1.0 + d.bandwidth * d.bandwidth));
        return within("kde_standard_normal", d.value, ref, d.std_error, 4.0 * d.std_error);
    });
}

CheckResult check_cauchy_mixture(const ValidateOptions& o) {
    return guarded("cauchy_mixture_ks", [&] {
        const std::size_t n = o.fast ? 5'000 : 50'000;
        const double s = 0.5;
        Rng rng(o.seed, 0x6378);
        const Matrix s0 = Matrix::Constant(1, 1, s * s);
        std::vector<double> x(n);
        for (double& v : x) {
            const Matrix phi = sample_inverse_wishart({1.0, s0}, rng);
            v = std::sqrt(phi(0, 0)) * rng.normal();
        }
        const double d = ks_distance(x, [&](double t) { return cauchy_cdf(t, {0.0, s}); });
        return within("cauchy_mixture_ks", d, 0.0, 0.0, 1.63 / std::sqrt(static_cast<double>(n)), "normal / inverse-Wishart mixture vs Cauchy(0.5)");
    });
}

CheckResult check_dirichlet_simplex(const ValidateOptions& o) {
    return guarded("dirichlet_simplex", [&] {
        Rng rng(o.seed, 0x6469);
        const Matrix d = sample_dirichlet({(Vector(4) << 0.3, 1.0, 2.5, 40.0).finished()}, o.fast ? 10'000 : 100'000, rng);
        const double worst_sum = (d.rowwise().sum().array() - 1.0).abs().maxCoeff();
        const bool nonneg = (d.array() >= 0.0).all();
        CheckResult r = within("dirichlet_simplex", worst_sum, 0.0, 0.0, 1e-12);
        r.passed = r.passed && nonneg;
        if (!nonneg) r.detail = "negative component";
        return r;
    });
}

CheckResult check_cholesky(const ValidateOptions& o) {
    return guarded("cholesky_round_trip", [&] {
        Rng rng(o.seed, 0x6368);
        double worst = 0.0;
        for (int rep = 0; rep < 200; ++rep) {
            const Eigen::Index p = 2 + rep % 5;
            Matrix a(p, p);
            for (Eigen::Index i = 0; i < p; ++i) {
                for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
            }
            const Matrix m = a * a.transpose() + 0.1 * Matrix::Identity(p, p);
            const Matrix l = cholesky_lower(m);
            worst = std::max(worst, (l * l.transpose() - m).norm() / m.norm());
        }
        return within("cholesky_round_trip", worst, 0.0, 0.0, 1e-12);
    });
}

NormalMeanProblem normal_mean_problem(std::uint64_t seed) {
    NormalMeanProblem p;
    p.y = synthetic_normal(20, 0.3, 1.0, seed);
    p.constrained_ig_shape = 1.5;
    p.constrained_ig_scale = 1.0;
    return p;
}

CheckResult check_normal_mean_oracle(const ValidateOptions& o) {
    return guarded("normal_mean_generalized_vs_quadrature", [&] {
        const NormalMeanProblem p = normal_mean_problem(o.seed);
        const SdIngredients in = normal_mean_ingredients(p, o.fast ? 100'000 : 1'000'000, o.seed);
        const double bf = assemble_bf(in);
        const double oracle = oracle_bf_quadrature(p);
        return within("normal_mean_generalized_vs_quadrature", bf, oracle, assemble_bf_std_error(in), 0.01 * oracle,
                      "relative tolerance 1%");
    });
}

CheckResult check_no_order_constraint(const ValidateOptions& o) {
    return guarded("no_order_constraint_reduction", [&] {
        const NormalMeanProblem p = normal_mean_problem(o.seed + 1);
        const SdIngredients in = normal_mean_ingredients(p, o.fast ? 100'000 : 1'000'000, o.seed + 1);
        const double bf = assemble_bf(in);
        const double vw = in.posterior_density_at_re.value / in.prior_density_at_re.value * normal_mean_correction_quadrature(p);
        const double se = assemble_bf_std_error(in);
        return within("no_order_constraint_reduction", bf, vw, se, 3.0 * se, "pipeline vs density ratio times quadrature correction");
    });
}

CheckResult check_two_group(const ValidateOptions& o) {
    return guarded("two_group_generalized_vs_quadrature", [&] {
        TwoGroupProblem p;
        p.y1 = synthetic_normal(15, 0.4, 1.0, o.seed + 2);
        p.y2 = synthetic_normal(15, 0.5, 1.0, o.seed + 3);
        p.tau = 1.0;
        p.tau_c = 0.5;
        const SdIngredients in = two_group_ingredients(p, o.fast ? 100'000 : 1'000'000, o.seed);
        const double bf = assemble_bf(in);
        const double se = assemble_bf_std_error(in);
        const double oracle = oracle_bf_quadrature(p);
        return within("two_group_generalized_vs_quadrature", bf, oracle, se, 4.0 * se + 1e-6 * oracle);
    });
}

CheckResult check_binomial(const ValidateOptions& o) {
    (void)o;
    return guarded("binomial_density_ratio_vs_quadrature", [&] {
        BinomialProblem p;
        p.successes = 14;
        p.trials = 40;
        p.beta_a = 2.0;
        p.beta_b = 3.0;
        p.equality_value = 0.5;
        const double sd = binomial_savage_dickey(p);
        const double oracle = oracle_bf_quadrature(p);
        return within("binomial_density_ratio_vs_quadrature", sd, oracle, 0.0, 1e-8 * oracle);
    });
}

CheckResult check_order_reduction(const ValidateOptions& o) {
    return guarded("multinomial_order_reduction", [&] {
        MultinomialTestConfig c;
        c.completed_prior_is_conditional = true;
        c.n_mc = o.fast ? 200'000 : 2'000'000;
        c.seed = o.seed;
        const BayesFactorReport r = run_multinomial_test(c);
        const OrderReduction red = multinomial_order_reduction(c);
        const double se = std::hypot(r.bf_std_error, red.std_error);
        return within("multinomial_order_reduction", r.bf_cu, red.bf, se, 3.0 * se, "generalized ratio vs order-probability shortcut");
    });
}

CheckResult check_theta_e_density(const ValidateOptions& o, const Vector& alpha, const std::string& name) {
    return guarded(name, [&] {
        const auto draws = theta_e_samples(alpha, 10'000'000, o.seed, 0x7465);
        KdeOptions opts;
        opts.std_error_method = StdErrorMethod::PlugIn;
        const DensityEstimate d = kde_at_point(draws, 0.0, opts);
        const double exact = analytic_theta_e_density(alpha);
        return within(name, d.value, exact, d.std_error, 0.02 * exact, "relative tolerance 2%");
    });
}

MvtData oracle_mvt_data(std::uint64_t seed) {
    Rng rng(seed, 0x6d76);
    Matrix y(12, 2);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        y(i, 0) = 0.4 + rng.normal();
        y(i, 1) = 0.6 + rng.normal();
    }
    return MvtData::from_rows(y);
}

CheckResult check_conjugate_unconstrained(const ValidateOptions& o) {
    return guarded("conjugate_chain_fixed_phi", [&] {
        const MvtData data = oracle_mvt_data(o.seed);
        const Matrix sigma = (Matrix(2, 2) << 1.0, 0.3, 0.3, 1.5).finished();
        const Matrix phi = (Matrix(2, 2) << 0.5, 0.1, 0.1, 0.25).finished();
        SamplerConfig cfg;
        cfg.n_draws = o.fast ? 20'000 : 200'000;
        cfg.n_burnin = 100;
        cfg.prior_scale_matrix = phi;
        cfg.seed = o.seed;
        cfg.hooks.fixed_sigma = sigma;
        cfg.hooks.fixed_phi = phi;
        const ChainOutput out = run_unconstrained_chain(data, cfg);

        const auto n = static_cast<double>(data.n);
        const Matrix cov = (phi.inverse() + n * Matrix::Identity(2, 2)).inverse();
        const Vector mean = cov * (n * standardized_mean(data, sigma));
        double worst = 0.0;
        double worst_se = 0.0;
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double se = std::sqrt(cov(j, j) / static_cast<double>(cfg.n_draws));
            const double z = std::abs(out.delta_draws.col(j).mean() - mean[j]) / se;
            if (z > worst) {
                worst = z;
                worst_se = se;
            }
        }
        // 2 SE at 95% family-wise over the two means.
        return within("conjugate_chain_fixed_phi", worst, 0.0, worst_se, 2.241, "largest |z| of the delta means");
    });
}

CheckResult check_conjugate_constrained(const ValidateOptions& o) {
    return guarded("conjugate_chain_cauchy_mixture", [&] {
        const MvtData data = oracle_mvt_data(o.seed + 7);
        const Matrix sigma = Matrix::Identity(2, 2);
        const double s = 0.5;
        SamplerConfig cfg;
        cfg.n_draws = o.fast ? 50'000 : 400'000;
        cfg.prior_scale_matrix = Matrix::Constant(1, 1, s * s);
        cfg.seed = o.seed;
        cfg.hooks.fixed_sigma = sigma;
        const ChainOutput out = run_constrained_chain(data, cfg);
        std::vector<double> draws(static_cast<std::size_t>(out.delta_draws.rows()));
        for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = out.delta_draws(static_cast<Eigen::Index>(i), 0);
        const McEstimate m = mc_expectation_batched(draws, [](double d) { return d; }, 50);

        // Cauchy(0, s) prior times the likelihood of the common effect along (1, 1).
        const Vector v = Vector::Ones(2);
        const Vector z = standardized_mean(data, sigma);
        const double n = static_cast<double>(data.n);
        const double center = v.dot(z) / v.squaredNorm();
        const double sd = 1.0 / std::sqrt(n * v.squaredNorm());
        const auto kernel = [&](double d) { return cauchy_pdf(d, {0.0, s}) * std::exp(-0.5 * (d - center) * (d - center) / (sd * sd)); };
        using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
        const double lo = center - 40.0 * sd;
        const double hi = center + 40.0 * sd;
        const double z0 = gk::integrate(kernel, lo, hi, 15, 1e-12);
        const double z1 = gk::integrate([&](double d) { return d * kernel(d); }, lo, hi, 15, 1e-12);
        return within("conjugate_chain_cauchy_mixture", m.value, z1 / z0, m.std_error, 4.0 * m.std_error, "posterior mean of the common effect");
    });
}

CheckResult check_determinism(const ValidateOptions& o) {
    return guarded("seed_determinism", [&] {
        MultinomialTestConfig c;
        c.n_mc = 20'000;
        c.seed = o.seed;
        const double a = run_multinomial_test(c).bf_cu;
        const double b = run_multinomial_test(c).bf_cu;
        CheckResult r = within("seed_determinism", a - b, 0.0, 0.0, 0.0, "two multinomial runs with one seed");
        r.passed = r.passed && a == b;
        return r;
    });
}

CheckResult check_simd(const ValidateOptions& o) {
    return guarded("simd_kernel_equivalence", [&] {
        Rng rng(o.seed, 0x7364);
        std::vector<double> x(10'007);
        for (double& v : x) v = 3.0 * rng.normal();
        const auto ref = simd::scalar::gaussian_kernel_sums(x, 0.2, 1.0 / 0.3);
        double rel = 0.0;
        std::string detail = "scalar only";
        if (simd::isa_available(simd::Isa::Avx2)) {
            simd::ScopedIsa scope(simd::Isa::Avx2);
            const auto got = simd::gaussian_kernel_sums(x, 0.2, 1.0 / 0.3);
            rel = std::max(std::abs(got.sum - ref.sum) / ref.sum, std::abs(got.sum_sq - ref.sum_sq) / ref.sum_sq);
            detail = "avx2 vs scalar";
        }
        return within("simd_kernel_equivalence", rel, 0.0, 0.0, 1e-12, detail);
    });
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidateOptions& o) {
    std::vector<CheckResult> out;
    out.push_back(check_kde(o));
    out.push_back(check_cauchy_mixture(o));
    out.push_back(check_dirichlet_simplex(o));
    out.push_back(check_cholesky(o));
    out.push_back(check_simd(o));
    out.push_back(check_normal_mean_oracle(o));
    out.push_back(check_no_order_constraint(o));
    out.push_back(check_two_group(o));
    out.push_back(check_binomial(o));
    out.push_back(check_theta_e_density(o, Vector::Ones(4), "theta_e_density_prior"));
    out.push_back(check_theta_e_density(o, (Vector(4) << 316.0, 102.0, 109.0, 33.0).finished(), "theta_e_density_posterior"));
    out.push_back(check_order_reduction(o));
    out.push_back(check_conjugate_unconstrained(o));
    out.push_back(check_conjugate_constrained(o));
    out.push_back(check_determinism(o));
    return out;
}

bool print_checks(const std::vector<CheckResult>& checks, std::ostream& out) {
    bool all = true;
    char buf[256];
    for (const auto& c : checks) {
        all = all && c.passed;
        std::snprintf(buf, sizeof buf, "%s %-40s value=%.6g reference=%.6g se=%.3g tol=%.3g", c.passed ? "PASS" : "FAIL",
                      c.name.c_str(), c.value, c.reference, c.std_error, c.tolerance);
        out << buf;
        if (!c.detail.empty()) out << "  (" << c.detail << ")";
        out << "\n";
    }
    return all;
}

}  // namespace sdbf::cli
