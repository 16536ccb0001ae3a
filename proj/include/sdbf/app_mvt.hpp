#pragma once

// Constrained multivariate t test on two standardized effects:
//
//   H_c: delta_1 = delta_2 > 0   versus   H_u: (delta_1, delta_2) unconstrained,
//
// written on theta = T delta with theta_e = delta_1 - delta_2 and theta_o = delta_2.

#include <sdbf/bayes_factor.hpp>
#include <sdbf/density_est.hpp>
#include <sdbf/mcmc.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace sdbf {

/// Prior of theta_o given theta_e = 0 used inside the constrained chain and in the
/// denominator of the expectation integrand.
enum class ConditionalPriorMode {
    Exact,         // the implied conditional of the bivariate Cauchy: Student t with 2 df
    CauchyCompat,  // Cauchy with the same scale, as in the original reference script
};

/// Completed prior of the common effect under H_c.
enum class CompletedPrior {
    Cauchy,               // Cauchy(0, s1)
    ImpliedConditional,   // equal to the conditional prior; the expectation becomes Pr(theta_o > 0 | theta_e = 0, y)
};

struct MvtTestConfig {
    /// Diagonal of S_u0, the scale matrix of the unconstrained Cauchy prior on delta.
    Vector prior_scale_unconstrained = Vector::Constant(2, 0.25);
    /// s1, the Cauchy scale of the common effect under H_c.
    double prior_scale_constrained = 0.5;
    Matrix transform = (Matrix(2, 2) << 1.0, -1.0, 0.0, 1.0).finished();

    std::size_t n_draws = 100'000;
    std::optional<std::size_t> n_burnin;
    std::uint64_t seed = 123;
    /// Sigma random-walk sds per chain; empty means data-derived and adapted during burn-in.
    std::vector<double> unconstrained_step_sds;
    std::vector<double> constrained_step_sds;
    std::optional<MvtModelState> unconstrained_init;
    std::optional<MvtModelState> constrained_init;

    ConditionalPriorMode conditional_prior = ConditionalPriorMode::Exact;
    CompletedPrior completed_prior = CompletedPrior::Cauchy;
    KdeMode kde_mode = KdeMode::Exact;
    std::size_t batches = 50;
    double prior_odds = 1.0;

    bool emit_density_grid = false;
    std::size_t grid_points = 512;

    /// Throws InvalidParameter for non-positive scales, a singular transform or p != 2.
    void validate() const;
};

/// Tuned steps and starting values for the bundled fixture data.
MvtTestConfig mvt_fixture_config();
/// The bundled 36 x 2 fixture data set.
Matrix mvt_fixture_data();

/// Parameters of theta_o | theta_e = 0 when delta ~ Cauchy(0, S_u0) and theta = T delta.
StudentTParams implied_conditional_prior(const Matrix& prior_scale, const Matrix& transform);
/// (df, scale) of implied_conditional_prior.
std::pair<double, double> implied_conditional_prior_scale(const Matrix& prior_scale, const Matrix& transform);

/// Density curves behind the usual figure: theta_e posterior / prior and the
/// conditional theta_o posterior.
struct MvtDensityGrid {
    std::vector<double> theta_e;
    std::vector<double> theta_e_posterior;
    std::vector<double> theta_e_prior;
    std::vector<double> theta_o;
    std::vector<double> theta_o_conditional_posterior;
};

struct MvtResult {
    BayesFactorReport report;
    std::optional<MvtDensityGrid> grid;
};

MvtResult analyze_mvt(const Matrix& data, const MvtTestConfig& config);
BayesFactorReport run_mvt_test(const Matrix& data, const MvtTestConfig& config);

/// Flag attached to every mvt report about the published posterior probabilities.
extern const char* const kPublishedProbabilityFlag;

}  // namespace sdbf
