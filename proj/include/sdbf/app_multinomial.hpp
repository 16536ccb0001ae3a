#pragma once

// Mendelian hypothesis on four cell probabilities,
//
//   H_c: gamma_1 > gamma_2 = gamma_3 > gamma_4   versus   H_u: gamma ~ Dirichlet(alpha_u).
//
// The completed prior under H_c is the scaled Dirichlet law of (xi_1, xi_2/2, xi_4).

#include <sdbf/bayes_factor.hpp>
#include <sdbf/density_est.hpp>
#include <sdbf/rng.hpp>

#include <array>
#include <cstdint>
#include <optional>

namespace sdbf {

struct MultinomialTestConfig {
    std::array<std::int64_t, 4> counts{315, 101, 108, 32};
    ScaledDirichletParams completed_prior{9.0, 6.0, 1.0};
    /// Use the conditional unconstrained prior given gamma_2 = gamma_3 as the completed prior.
    bool completed_prior_is_conditional = false;
    Vector unconstrained_prior_alpha = Vector::Ones(4);
    std::size_t n_mc = 10'000'000;
    std::uint64_t seed = 123;
    KdeMode kde_mode = KdeMode::Exact;
    double prior_odds = 1.0;

    /// Throws InvalidParameter for negative counts, a zero total or non-positive alphas.
    void validate() const;
    Vector posterior_alpha() const;
};

/// (alpha_1, alpha_2 + alpha_3 - 1, alpha_4). Requires alpha_2 + alpha_3 > 1.
Vector conditional_dirichlet_params(const Vector& alpha);

/// Draws (n x 4) of gamma ~ Dirichlet(alpha) given gamma_2 = gamma_3.
Matrix conditional_posterior_draws(const Vector& alpha, std::size_t n, Rng& rng);

/// Exact density of gamma_2 - gamma_3 at 0 under Dirichlet(alpha), in log-gamma space.
double analytic_theta_e_density(const Vector& alpha);
double log_analytic_theta_e_density(const Vector& alpha);

/// Samples of gamma_2 - gamma_3 under Dirichlet(alpha), generated in fixed chunks so the
/// result does not depend on the worker count.
std::vector<double> theta_e_samples(const Vector& alpha, std::size_t n, std::uint64_t seed, std::uint64_t stream);

BayesFactorReport run_multinomial_test(const MultinomialTestConfig& config);

/// The order-probability shortcut for the conditional completed prior,
/// (post / prior) * (Pr(order | theta_e = 0, y) / Pr(order | theta_e = 0)),
/// from random streams independent of run_multinomial_test.
struct OrderReduction {
    double bf = 0.0;
    double std_error = 0.0;
    DensityEstimate posterior_density;
    DensityEstimate prior_density;
    McEstimate posterior_order_prob;
    McEstimate prior_order_prob;
};
OrderReduction multinomial_order_reduction(const MultinomialTestConfig& config);

}  // namespace sdbf
