// Quadrature marginal likelihoods for small conjugate problems, and the
// Savage-Dickey ingredients of the same problems for comparison.

#include <sdbf/bayes_factor.hpp>

#include <sdbf/error.hpp>
#include <sdbf/rng.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace sdbf {

namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kAcceptRelErr = 1e-7;
// Integrands are scaled to peak near 1, so this is negligible against any integral that matters.
constexpr double kAcceptAbsErr = 1e-14;
constexpr unsigned kMaxDepth = 20;
constexpr double kWindowSds = 40.0;

template <class F>
double integrate(F&& f, double lo, double hi, const char* what) {
    double err = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, kMaxDepth, kQuadTol, &err, &l1);
    if (!std::isfinite(value) || err > std::max(kAcceptRelErr * std::max(l1, std::abs(value)), kAcceptAbsErr)) {
        throw OracleError(std::string(what) + ": quadrature did not converge (error estimate " + std::to_string(err) + ")");
    }
    return value;
}

double ig_log_pdf(double x, double shape, double scale) {
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double normal_log_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * d * d / var;
}

struct Summary {
    double n = 0.0;
    double mean = 0.0;
    double ss = 0.0;      // sum of squared deviations
    double sum_sq = 0.0;  // sum of squares
};

Summary summarize(const std::vector<double>& y) {
    if (y.empty()) throw InvalidParameter("oracle: empty data");
    Summary s;
    s.n = static_cast<double>(y.size());
    s.mean = std::accumulate(y.begin(), y.end(), 0.0) / s.n;
    for (double v : y) {
        s.ss += (v - s.mean) * (v - s.mean);
        s.sum_sq += v * v;
    }
    return s;
}

// log N(y | theta, sigma2) summed over the sample.
double normal_loglik(const Summary& s, double theta, double sigma2) {
    const double d = s.mean - theta;
    return -0.5 * s.n * std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * (s.ss + s.n * d * d) / sigma2;
}

void check_normal_mean(const NormalMeanProblem& p) {
    if (p.y.size() < 2) throw InvalidParameter("normal-mean problem: need at least two observations");
    if (!(p.g > 0.0) || !(p.ig_shape > 0.0) || !(p.ig_scale > 0.0) || !(p.constrained_ig_shape > 0.0) ||
        !(p.constrained_ig_scale > 0.0)) {
        throw InvalidParameter("normal-mean problem: prior parameters must be positive");
    }
}

}  // namespace

double oracle_bf_quadrature(const NormalMeanProblem& problem) {
    check_normal_mean(problem);
    const Summary s = summarize(problem.y);
    const double sigma2_hat = std::max(s.ss / s.n, 1e-12);
    const double offset = normal_loglik(s, s.mean, sigma2_hat);
    const double t_center = std::log(sigma2_hat);
    const double t_lo = t_center - 30.0;
    const double t_hi = t_center + 30.0;

    // p_u: outer over t = log sigma^2, inner over theta centred on its conditional mode.
    const auto inner = [&](double sigma2) {
        const double precision = s.n + 1.0 / problem.g;
        const double center = s.n * s.mean / precision;
        const double sd = std::sqrt(sigma2 / precision);
        return integrate(
            [&](double theta) {
                return std::exp(normal_loglik(s, theta, sigma2) - offset + normal_log_pdf(theta, 0.0, problem.g * sigma2));
            },
            center - kWindowSds * sd, center + kWindowSds * sd, "normal-mean p_u inner");
    };
    const double p_u = integrate(
        [&](double t) {
            const double sigma2 = std::exp(t);
            return inner(sigma2) * std::exp(ig_log_pdf(sigma2, problem.ig_shape, problem.ig_scale) + t);
        },
        t_lo, t_hi, "normal-mean p_u");
    const double p_c = integrate(
        [&](double t) {
            const double sigma2 = std::exp(t);
            return std::exp(normal_loglik(s, 0.0, sigma2) - offset +
                            ig_log_pdf(sigma2, problem.constrained_ig_shape, problem.constrained_ig_scale) + t);
        },
        t_lo, t_hi, "normal-mean p_c");
    return p_c / p_u;
}

double oracle_bf_quadrature(const TwoGroupProblem& problem) {
    if (problem.y1.empty() || problem.y2.empty()) throw InvalidParameter("two-group problem: empty group");
    if (!(problem.tau > 0.0) || !(problem.tau_c > 0.0)) throw InvalidParameter("two-group problem: prior sds must be positive");
    const Summary s1 = summarize(problem.y1);
    const Summary s2 = summarize(problem.y2);
    const double offset = normal_loglik(s1, s1.mean, 1.0) + normal_loglik(s2, s2.mean, 1.0);
    const double tau2 = problem.tau * problem.tau;
    const double tau_c2 = problem.tau_c * problem.tau_c;

    const auto window = [](const Summary& s, double prior_var) {
        const double precision = s.n + 1.0 / prior_var;
        const double center = s.n * s.mean / precision;
        const double sd = 1.0 / std::sqrt(precision);
        return std::pair{center - kWindowSds * sd, center + kWindowSds * sd};
    };
    const auto [lo1, hi1] = window(s1, tau2);
    const auto [lo2, hi2] = window(s2, tau2);
    const double p_u = integrate(
        [&](double mu1) {
            const double outer = normal_loglik(s1, mu1, 1.0) + normal_log_pdf(mu1, 0.0, tau2);
            return integrate(
                [&](double mu2) {
                    return std::exp(outer + normal_loglik(s2, mu2, 1.0) + normal_log_pdf(mu2, 0.0, tau2) - offset);
                },
                lo2, hi2, "two-group p_u inner");
        },
        lo1, hi1, "two-group p_u");

    const double precision_c = s1.n + s2.n + 1.0 / tau_c2;
    const double center_c = (s1.n * s1.mean + s2.n * s2.mean) / precision_c;
    const double sd_c = 1.0 / std::sqrt(precision_c);
    const double lo_c = std::max(0.0, center_c - kWindowSds * sd_c);
    const double hi_c = std::max(lo_c + sd_c, center_c + kWindowSds * sd_c);
    const double p_c = integrate(
        [&](double mu) {
            // Truncated completed prior: 2 N(mu | 0, tau_c^2) on mu > 0.
            return 2.0 * std::exp(normal_loglik(s1, mu, 1.0) + normal_loglik(s2, mu, 1.0) +
                                  normal_log_pdf(mu, 0.0, tau_c2) - offset);
        },
        lo_c, hi_c, "two-group p_c");
    return p_c / p_u;
}

double oracle_bf_quadrature(const BinomialProblem& problem) {
    if (problem.trials < 0 || problem.successes < 0 || problem.successes > problem.trials) {
        throw InvalidParameter("binomial problem: need 0 <= successes <= trials");
    }
    if (!(problem.beta_a > 0.0) || !(problem.beta_b > 0.0)) throw InvalidParameter("binomial problem: Beta parameters must be positive");
    const auto y = static_cast<double>(problem.successes);
    const auto n = static_cast<double>(problem.trials);
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
    const double log_beta = std::lgamma(problem.beta_a) + std::lgamma(problem.beta_b) - std::lgamma(problem.beta_a + problem.beta_b);
    const auto log_lik = [&](double g) { return log_choose + y * std::log(g) + (n - y) * std::log1p(-g); };
    const double offset = log_lik(std::clamp((y + 0.5) / (n + 1.0), 1e-12, 1.0 - 1e-12));

    boost::math::quadrature::tanh_sinh<double> ts;
    double err = 0.0;
    double l1 = 0.0;
    const double p_u = ts.integrate(
        [&](double g) {
            if (g <= 0.0 || g >= 1.0) return 0.0;
            return std::exp(log_lik(g) - offset + (problem.beta_a - 1.0) * std::log(g) +
                            (problem.beta_b - 1.0) * std::log1p(-g) - log_beta);
        },
        0.0, 1.0, kQuadTol, &err, &l1);
    if (!std::isfinite(p_u) || err > kAcceptRelErr * std::max(l1, p_u)) throw OracleError("binomial p_u: quadrature did not converge");
    if (!problem.equality_value) return 1.0;
    const double r = *problem.equality_value;
    if (!(r > 0.0 && r < 1.0)) throw InvalidParameter("binomial problem: equality value must lie in (0, 1)");
    return std::exp(log_lik(r) - offset) / p_u;
}

double binomial_savage_dickey(const BinomialProblem& problem) {
    if (!problem.equality_value) return 1.0;
    const double r = *problem.equality_value;
    const auto y = static_cast<double>(problem.successes);
    const auto n = static_cast<double>(problem.trials);
    const auto beta_log_pdf = [](double x, double a, double b) {
        return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    };
    return std::exp(beta_log_pdf(r, problem.beta_a + y, problem.beta_b + n - y) - beta_log_pdf(r, problem.beta_a, problem.beta_b));
}

namespace {

struct NormalMeanPosterior {
    StudentTParams theta_posterior;
    StudentTParams theta_prior;
    double cond_prior_shape = 0.0;  // pi_u(sigma^2 | theta = 0) = IG(shape, scale)
    double cond_prior_scale = 0.0;
    double cond_post_shape = 0.0;   // pi_u(sigma^2 | theta = 0, y)
    double cond_post_scale = 0.0;
};

NormalMeanPosterior normal_mean_posterior(const NormalMeanProblem& p) {
    check_normal_mean(p);
    const Summary s = summarize(p.y);
    const double v = 1.0 / (s.n + 1.0 / p.g);
    const double m = v * s.n * s.mean;
    const double a_post = p.ig_shape + 0.5 * s.n;
    const double b_post = p.ig_scale + 0.5 * (s.sum_sq - m * m / v);
    NormalMeanPosterior out;
    out.theta_posterior = {2.0 * a_post, m, std::sqrt(v * b_post / a_post)};
    out.theta_prior = {2.0 * p.ig_shape, 0.0, std::sqrt(p.g * p.ig_scale / p.ig_shape)};
    out.cond_prior_shape = p.ig_shape + 0.5;
    out.cond_prior_scale = p.ig_scale;
    out.cond_post_shape = p.ig_shape + 0.5 + 0.5 * s.n;
    out.cond_post_scale = p.ig_scale + 0.5 * s.sum_sq;
    return out;
}

}  // namespace

SdIngredients normal_mean_ingredients(const NormalMeanProblem& problem, std::size_t n_mc, std::uint64_t seed) {
    const NormalMeanPosterior post = normal_mean_posterior(problem);
    Rng rng(seed, 0x6e6d);
    MomentAccumulator acc;
    for (std::size_t i = 0; i < n_mc; ++i) {
        const double sigma2 = post.cond_post_scale / rng.gamma(post.cond_post_shape);
        acc.add(std::exp(ig_log_pdf(sigma2, problem.constrained_ig_shape, problem.constrained_ig_scale) -
                         ig_log_pdf(sigma2, post.cond_prior_shape, post.cond_prior_scale)));
    }
    SdIngredients in;
    in.posterior_density_at_re = exact_density(student_t_pdf(0.0, post.theta_posterior));
    in.prior_density_at_re = exact_density(student_t_pdf(0.0, post.theta_prior));
    in.completed_prior_prob = exact_estimate(1.0);
    in.prior_ratio_expectation = finish_expectation(acc);
    return in;
}

double normal_mean_correction_quadrature(const NormalMeanProblem& problem) {
    const NormalMeanPosterior post = normal_mean_posterior(problem);
    const double mode = std::log(post.cond_post_scale / (post.cond_post_shape + 1.0));
    return integrate(
        [&](double t) {
            const double sigma2 = std::exp(t);
            return std::exp(ig_log_pdf(sigma2, problem.constrained_ig_shape, problem.constrained_ig_scale) -
                            ig_log_pdf(sigma2, post.cond_prior_shape, post.cond_prior_scale) +
                            ig_log_pdf(sigma2, post.cond_post_shape, post.cond_post_scale) + t);
        },
        mode - 30.0, mode + 30.0, "normal-mean correction");
}

SdIngredients two_group_ingredients(const TwoGroupProblem& problem, std::size_t n_mc, std::uint64_t seed) {
    if (problem.y1.empty() || problem.y2.empty()) throw InvalidParameter("two-group problem: empty group");
    const Summary s1 = summarize(problem.y1);
    const Summary s2 = summarize(problem.y2);
    const double tau2 = problem.tau * problem.tau;
    const double v1 = 1.0 / (s1.n + 1.0 / tau2);
    const double v2 = 1.0 / (s2.n + 1.0 / tau2);
    const double m1 = v1 * s1.n * s1.mean;
    const double m2 = v2 * s2.n * s2.mean;

    // mu_1 = mu_2 = mu slice of the posterior and of the prior.
    const double cond_precision = 1.0 / v1 + 1.0 / v2;
    const double cond_mean = (m1 / v1 + m2 / v2) / cond_precision;
    const double cond_sd = 1.0 / std::sqrt(cond_precision);
    const double cond_prior_sd = problem.tau / std::numbers::sqrt2;

    Rng rng(seed, 0x7467);
    MomentAccumulator acc;
    for (std::size_t i = 0; i < n_mc; ++i) {
        const double mu = cond_mean + cond_sd * rng.normal();
        acc.add(mu > 0.0 ? normal_pdf(mu, 0.0, problem.tau_c) / normal_pdf(mu, 0.0, cond_prior_sd) : 0.0);
    }
    SdIngredients in;
    in.posterior_density_at_re = exact_density(normal_pdf(0.0, m1 - m2, std::sqrt(v1 + v2)));
    in.prior_density_at_re = exact_density(normal_pdf(0.0, 0.0, std::sqrt(2.0) * problem.tau));
    in.completed_prior_prob = exact_estimate(0.5);
    in.prior_ratio_expectation = finish_expectation(acc);
    return in;
}

}  // namespace sdbf
