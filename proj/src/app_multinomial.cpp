#include <sdbf/app_multinomial.hpp>

#include <sdbf/error.hpp>
#include <sdbf/parallel.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace sdbf {

namespace {

// Fixed work split; each chunk owns one random stream.
constexpr std::size_t kChunks = 16;

constexpr std::uint64_t kPriorDensityStream = 1;
constexpr std::uint64_t kPosteriorDensityStream = 2;
constexpr std::uint64_t kOrderProbStream = 3;
constexpr std::uint64_t kExpectationStream = 4;
constexpr std::uint64_t kReductionOffset = 10;

std::uint64_t chunk_stream(std::uint64_t stream, std::size_t chunk) { return (stream << 8) | chunk; }

std::size_t chunk_begin(std::size_t n, std::size_t c) { return n * c / kChunks; }

bool mendel_order(double g1, double g2, double g4) { return g1 > g2 && g2 > g4; }

// Runs body(chunk, begin, end, rng) over every chunk on the worker pool.
template <class Body>
void for_chunks(std::size_t n, std::uint64_t seed, std::uint64_t stream, Body&& body) {
    std::vector<std::function<void()>> tasks;
    tasks.reserve(kChunks);
    for (std::size_t c = 0; c < kChunks; ++c) {
        tasks.emplace_back([&, c] {
            Rng rng(seed, chunk_stream(stream, c));
            body(c, chunk_begin(n, c), chunk_begin(n, c + 1), rng);
        });
    }
    run_tasks(tasks);
}

// Draws (g1, g2, g4) from the scaled Dirichlet with parameters (a1, a2, a3).
struct Triple {
    double g1, g2, g4;
};

Triple draw_scaled_dirichlet(double a1, double a2, double a3, Rng& rng) {
    const double x1 = rng.gamma(a1);
    const double x2 = rng.gamma(a2);
    const double x3 = rng.gamma(a3);
    const double total = x1 + x2 + x3;
    return {x1 / total, 0.5 * x2 / total, x3 / total};
}

McEstimate order_probability(const ScaledDirichletParams& p, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    std::vector<ProportionAccumulator> acc(kChunks);
    for_chunks(n, seed, stream, [&](std::size_t c, std::size_t lo, std::size_t hi, Rng& rng) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Triple g = draw_scaled_dirichlet(p.alpha1, p.alpha2, p.alpha3, rng);
            acc[c].add(mendel_order(g.g1, g.g2, g.g4));
        }
    });
    for (std::size_t c = 1; c < kChunks; ++c) acc[0].merge(acc[c]);
    if (acc[0].count() < kMinMcSamples) throw EstimationError("order probability: too few draws");
    return finish_probability(acc[0]);
}

ScaledDirichletParams to_scaled(const Vector& a) { return {a[0], a[1], a[2]}; }

KdeOptions kde_options(const MultinomialTestConfig& config, std::uint64_t stream) {
    KdeOptions o;
    o.mode = config.kde_mode;
    o.std_error_method = StdErrorMethod::Bootstrap;
    o.seed = config.seed ^ (stream << 32);
    return o;
}

double delta_method_ratio_se(double value, std::initializer_list<std::pair<double, double>> parts) {
    double rel = 0.0;
    for (const auto& [v, se] : parts) {
        if (se > 0.0) rel += (se / v) * (se / v);
    }
    return value * std::sqrt(rel);
}

}  // namespace

void MultinomialTestConfig::validate() const {
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw InvalidParameter("multinomial test: counts must be nonnegative");
        total += c;
    }
    if (total <= 0) throw InvalidParameter("multinomial test: counts must not all be zero");
    if (unconstrained_prior_alpha.size() != 4 || !(unconstrained_prior_alpha.array() > 0.0).all() ||
        !unconstrained_prior_alpha.allFinite()) {
        throw InvalidParameter("multinomial test: unconstrained prior needs four positive alphas");
    }
    if (unconstrained_prior_alpha[1] + unconstrained_prior_alpha[2] <= 1.0) {
        throw InvalidParameter("multinomial test: need alpha_2 + alpha_3 > 1 for the conditional prior");
    }
    if (!(completed_prior.alpha1 > 0.0) || !(completed_prior.alpha2 > 0.0) || !(completed_prior.alpha3 > 0.0)) {
        throw InvalidParameter("multinomial test: completed prior alphas must be positive");
    }
    if (n_mc < kMinMcSamples) throw InvalidParameter("multinomial test: need at least " + std::to_string(kMinMcSamples) + " draws");
    if (!(prior_odds > 0.0)) throw InvalidParameter("multinomial test: prior odds must be positive");
}

Vector MultinomialTestConfig::posterior_alpha() const {
    Vector a = unconstrained_prior_alpha;
    for (Eigen::Index k = 0; k < 4; ++k) a[k] += static_cast<double>(counts[static_cast<std::size_t>(k)]);
    return a;
}

Vector conditional_dirichlet_params(const Vector& alpha) {
    if (alpha.size() != 4 || !(alpha.array() > 0.0).all()) throw InvalidParameter("conditional Dirichlet: need four positive alphas");
    const double merged = alpha[1] + alpha[2] - 1.0;
    if (!(merged > 0.0)) throw InvalidParameter("conditional Dirichlet: need alpha_2 + alpha_3 > 1");
    return (Vector(3) << alpha[0], merged, alpha[3]).finished();
}

Matrix conditional_posterior_draws(const Vector& alpha, std::size_t n, Rng& rng) {
    const Vector c = conditional_dirichlet_params(alpha);
    Matrix out(static_cast<Eigen::Index>(n), 4);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const Triple g = draw_scaled_dirichlet(c[0], c[1], c[2], rng);
        out.row(i) << g.g1, g.g2, g.g2, g.g4;
    }
    return out;
}

double log_analytic_theta_e_density(const Vector& alpha) {
    if (alpha.size() != 4 || !(alpha.array() > 0.0).all()) throw InvalidParameter("theta_e density: need four positive alphas");
    const double a23 = alpha[1] + alpha[2];
    if (!(a23 > 1.0)) throw InvalidParameter("theta_e density: need alpha_2 + alpha_3 > 1");
    return std::lgamma(a23) + std::log(alpha.sum() - 1.0) - std::lgamma(alpha[1]) - std::lgamma(alpha[2]) -
           std::log(a23 - 1.0) - (a23 - 1.0) * std::numbers::ln2;
}

double analytic_theta_e_density(const Vector& alpha) {
    const double log_value = log_analytic_theta_e_density(alpha);
    const double a23 = alpha[1] + alpha[2];
    if (a23 > 500.0) return std::exp(log_value);
    // Direct form keeps small integer cases exact.
    return std::exp(std::lgamma(a23) - std::lgamma(alpha[1]) - std::lgamma(alpha[2])) * std::exp2(1.0 - a23) *
           (alpha.sum() - 1.0) / (a23 - 1.0);
}

std::vector<double> theta_e_samples(const Vector& alpha, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    if (alpha.size() != 4 || !(alpha.array() > 0.0).all()) throw InvalidParameter("theta_e samples: need four positive alphas");
    std::vector<double> out(n);
    for_chunks(n, seed, stream, [&](std::size_t, std::size_t lo, std::size_t hi, Rng& rng) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double x1 = rng.gamma(alpha[0]);
            const double x2 = rng.gamma(alpha[1]);
            const double x3 = rng.gamma(alpha[2]);
            const double x4 = rng.gamma(alpha[3]);
            out[i] = (x2 - x3) / (x1 + x2 + x3 + x4);
        }
    });
    return out;
}

BayesFactorReport run_multinomial_test(const MultinomialTestConfig& config) {
    config.validate();
    const Vector prior_alpha = config.unconstrained_prior_alpha;
    const Vector post_alpha = config.posterior_alpha();
    const Vector cond_prior = conditional_dirichlet_params(prior_alpha);
    const Vector cond_post = conditional_dirichlet_params(post_alpha);
    const ScaledDirichletParams cond_prior_sd = to_scaled(cond_prior);
    const ScaledDirichletParams completed = config.completed_prior_is_conditional ? cond_prior_sd : config.completed_prior;
    const std::size_t n = config.n_mc;

    SdIngredients in;
    {
        const auto draws = theta_e_samples(prior_alpha, n, config.seed, kPriorDensityStream);
        in.prior_density_at_re = kde_at_point(draws, 0.0, kde_options(config, kPriorDensityStream));
    }
    {
        const auto draws = theta_e_samples(post_alpha, n, config.seed, kPosteriorDensityStream);
        in.posterior_density_at_re = kde_at_point(draws, 0.0, kde_options(config, kPosteriorDensityStream));
    }
    in.completed_prior_prob = order_probability(completed, n, config.seed, kOrderProbStream);

    std::vector<MomentAccumulator> acc(kChunks);
    for_chunks(n, config.seed, kExpectationStream, [&](std::size_t c, std::size_t lo, std::size_t hi, Rng& rng) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Triple g = draw_scaled_dirichlet(cond_post[0], cond_post[1], cond_post[2], rng);
            if (!mendel_order(g.g1, g.g2, g.g4)) {
                acc[c].add(0.0);
                continue;
            }
            acc[c].add(std::exp(scaled_dirichlet_log_pdf(g.g1, g.g2, completed) -
                                scaled_dirichlet_log_pdf(g.g1, g.g2, cond_prior_sd)));
        }
    });
    for (std::size_t c = 1; c < kChunks; ++c) acc[0].merge(acc[c]);
    in.prior_ratio_expectation = finish_expectation(acc[0]);

    BayesFactorReport r = make_report("multinomial", in, config.prior_odds, config.seed);
    r.settings = {
        {"counts", std::vector<std::int64_t>(config.counts.begin(), config.counts.end())},
        {"n_mc", static_cast<std::int64_t>(n)},
        {"unconstrained_prior_alpha", std::vector<double>(prior_alpha.begin(), prior_alpha.end())},
        {"completed_prior_alpha", std::vector<double>{completed.alpha1, completed.alpha2, completed.alpha3}},
        {"completed_prior_is_conditional", config.completed_prior_is_conditional},
        {"kde_mode", std::string(config.kde_mode == KdeMode::Exact ? "exact" : "grid_compat")},
        {"kde_std_error", std::string(n > KdeOptions{}.bootstrap_max_samples ? "plug_in" : "bootstrap")},
        {"chunks", static_cast<std::int64_t>(kChunks)},
        {"prior_odds", config.prior_odds},
    };

    const double analytic_prior = analytic_theta_e_density(prior_alpha);
    const double analytic_post = analytic_theta_e_density(post_alpha);
    auto& dg = r.diagnostics;
    dg.emplace_back("analytic_prior_density_at_re", analytic_prior);
    dg.emplace_back("analytic_posterior_density_at_re", analytic_post);
    dg.emplace_back("kde_prior_relative_error", in.prior_density_at_re.value / analytic_prior - 1.0);
    dg.emplace_back("kde_posterior_relative_error", in.posterior_density_at_re.value / analytic_post - 1.0);
    dg.emplace_back("bf_analytic_densities", analytic_post / analytic_prior / in.completed_prior_prob.value *
                                                 in.prior_ratio_expectation.value);
    dg.emplace_back("kde_prior_bandwidth", in.prior_density_at_re.bandwidth);
    dg.emplace_back("kde_posterior_bandwidth", in.posterior_density_at_re.bandwidth);
    for (Eigen::Index k = 0; k < 3; ++k) dg.emplace_back("conditional_posterior_alpha_" + std::to_string(k + 1), cond_post[k]);

    r.flags.emplace_back("order constraint evaluated as gamma_1 > gamma_2 > gamma_4");
    r.flags.emplace_back("conditional posterior draws use prior alpha plus counts with the alpha_2 + alpha_3 - 1 merge");
    return r;
}

OrderReduction multinomial_order_reduction(const MultinomialTestConfig& config) {
    config.validate();
    const Vector prior_alpha = config.unconstrained_prior_alpha;
    const Vector post_alpha = config.posterior_alpha();
    const std::size_t n = config.n_mc;

    OrderReduction out;
    {
        const auto draws = theta_e_samples(prior_alpha, n, config.seed, kReductionOffset + kPriorDensityStream);
        out.prior_density = kde_at_point(draws, 0.0, kde_options(config, kReductionOffset + kPriorDensityStream));
    }
    {
        const auto draws = theta_e_samples(post_alpha, n, config.seed, kReductionOffset + kPosteriorDensityStream);
        out.posterior_density = kde_at_point(draws, 0.0, kde_options(config, kReductionOffset + kPosteriorDensityStream));
    }
    out.prior_order_prob =
        order_probability(to_scaled(conditional_dirichlet_params(prior_alpha)), n, config.seed, kReductionOffset + kOrderProbStream);
    out.posterior_order_prob =
        order_probability(to_scaled(conditional_dirichlet_params(post_alpha)), n, config.seed, kReductionOffset + kExpectationStream);

    out.bf = assemble_bf_order_reduction(out.posterior_density.value, out.prior_density.value, out.posterior_order_prob.value,
                                         out.prior_order_prob.value);
    out.std_error = delta_method_ratio_se(out.bf, {{out.posterior_density.value, out.posterior_density.std_error},
                                                   {out.prior_density.value, out.prior_density.std_error},
                                                   {out.posterior_order_prob.value, out.posterior_order_prob.std_error},
                                                   {out.prior_order_prob.value, out.prior_order_prob.std_error}});
    return out;
}

}  // namespace sdbf
