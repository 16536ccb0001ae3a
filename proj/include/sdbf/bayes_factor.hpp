#pragma once

#include <sdbf/density_est.hpp>
#include <sdbf/stats_dist.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sdbf {

/// The four estimated factors of the generalized Savage-Dickey ratio
///
///   B_cu = post(theta_e = r_e) / (prior(theta_e = r_e) * Pr_c*(theta_o > r_o)) * E[ratio * 1(theta_o > r_o)].
///
/// Analytic ingredients carry a zero standard error.
struct SdIngredients {
    DensityEstimate posterior_density_at_re;
    DensityEstimate prior_density_at_re;
    McEstimate completed_prior_prob;
    McEstimate prior_ratio_expectation;
};

/// Exact value wrapped as an estimate with zero standard error.
DensityEstimate exact_density(double value);
McEstimate exact_estimate(double value);

/// Equality constraints theta_e = r_e and order constraints theta_o > r_o on theta = T * key.
/// The first rows of the transform produce theta_e, the remaining ones theta_o.
struct HypothesisSpec {
    Vector equality_point;
    Vector order_thresholds;
    Matrix transform;
    std::vector<std::string> labels;

    /// Throws InvalidParameter when the transform is singular or the dimensions disagree.
    void validate() const;
    Vector to_theta(const Vector& key) const;
    Vector from_theta(const Vector& theta) const;
};

using SettingValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>, std::vector<std::int64_t>>;

struct BayesFactorReport {
    std::string analysis;
    double bf_cu = 0.0;
    double log_bf_cu = 0.0;
    double bf_std_error = 0.0;
    SdIngredients ingredients;
    double posterior_prob_c = 0.5;
    double posterior_prob_u = 0.5;
    double prior_odds = 1.0;
    std::uint64_t seed = 0;
    /// Run settings echoed for reproducibility (draw counts, modes, tolerances).
    std::vector<std::pair<std::string, SettingValue>> settings;
    /// Secondary numbers: analytic cross-checks, acceptance rates, alternative assemblies.
    std::vector<std::pair<std::string, double>> diagnostics;
    /// Human-readable caveats attached to this run.
    std::vector<std::string> flags;
};

/// log B_cu. Throws DivisionError for a non-positive prior density or prior probability.
double assemble_log_bf(const SdIngredients& ingredients);
double assemble_bf(const SdIngredients& ingredients);
/// First-order delta-method standard error of B_cu, treating the ingredients as independent.
double assemble_bf_std_error(const SdIngredients& ingredients);

/// (post_density / prior_density) * (post_order_prob / prior_order_prob).
double assemble_bf_order_reduction(double post_density, double prior_density, double post_order_prob,
                                   double prior_order_prob);

struct ModelProbabilities {
    double prob_c = 0.5;
    double prob_u = 0.5;
};

ModelProbabilities posterior_model_probs(double bf_cu, double prior_odds = 1.0);

/// Fills bf, its standard error and the posterior model probabilities.
BayesFactorReport make_report(std::string analysis, const SdIngredients& ingredients, double prior_odds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Small conjugate problems with quadrature marginal likelihoods.

/// y_i ~ N(theta, sigma^2). H_u: theta | sigma^2 ~ N(0, g sigma^2), sigma^2 ~ IG(a, b).
/// H_c: theta = 0, sigma^2 ~ IG(a_c, b_c).
struct NormalMeanProblem {
    std::vector<double> y;
    double g = 1.0;
    double ig_shape = 0.5;
    double ig_scale = 0.5;
    double constrained_ig_shape = 0.5;
    double constrained_ig_scale = 0.5;
};

/// Two groups with unit error variance, y_1j ~ N(mu_1, 1), y_2j ~ N(mu_2, 1).
/// H_u: mu_k ~ N(0, tau^2) independently.
/// H_c: mu_1 - mu_2 = 0 and mu_2 > 0 with completed prior mu ~ N(0, tau_c^2).
struct TwoGroupProblem {
    std::vector<double> y1;
    std::vector<double> y2;
    double tau = 1.0;
    double tau_c = 1.0;
};

/// y ~ Binomial(n, gamma). H_u: gamma ~ Beta(a, b). H_c: gamma = r, or H_c = H_u when r is empty.
struct BinomialProblem {
    std::int64_t successes = 0;
    std::int64_t trials = 0;
    double beta_a = 1.0;
    double beta_b = 1.0;
    std::optional<double> equality_value;
};

/// p_c(y) / p_u(y) from adaptive quadrature of both marginal likelihoods.
/// Throws OracleError when quadrature misses its tolerance.
double oracle_bf_quadrature(const NormalMeanProblem& problem);
double oracle_bf_quadrature(const TwoGroupProblem& problem);
double oracle_bf_quadrature(const BinomialProblem& problem);

/// Savage-Dickey ingredients for the normal-mean problem: analytic Student-t
/// posterior and prior densities of theta at 0, no order constraint
/// (probability 1), and the nuisance-prior correction
/// E[pi_c(sigma^2) / pi_u(sigma^2 | theta = 0)] over pi_u(sigma^2 | theta = 0, y),
/// estimated from `n_mc` draws.
SdIngredients normal_mean_ingredients(const NormalMeanProblem& problem, std::size_t n_mc, std::uint64_t seed);
/// The same correction factor by quadrature (no Monte Carlo).
double normal_mean_correction_quadrature(const NormalMeanProblem& problem);

/// Generalized ingredients for the two-group problem (equality and order constraint).
SdIngredients two_group_ingredients(const TwoGroupProblem& problem, std::size_t n_mc, std::uint64_t seed);

/// Beta posterior / prior density ratio at r.
double binomial_savage_dickey(const BinomialProblem& problem);

}  // namespace sdbf
