#pragma once

// Gibbs / random-walk Metropolis sampler for the standardized-effects model
//
//   y_i ~ N(L_Sigma * delta, Sigma),   L_Sigma L_Sigma' = Sigma,
//
// with a multivariate Cauchy prior on delta written as a normal scale mixture
// (delta | Phi ~ N(0, Phi), Phi ~ IW(df, S_0)) and the Jeffreys prior
// |Sigma|^{-(p+1)/2}. One sweep draws delta | Phi, Sigma, then Phi | delta, then
// each lower-triangle element of Sigma by a random-walk Metropolis step.
//
// The constrained variant ties all effects to one scalar, delta_vec = delta * v
// (v = (1, ..., 1) for "all effects equal"), with a univariate scale-mixture prior.

#include <sdbf/rng.hpp>
#include <sdbf/stats_dist.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sdbf {

/// Sufficient statistics of an n x p data matrix.
struct MvtData {
    Eigen::Index n = 0;
    Vector mean;
    Matrix scatter;  // sum_i (y_i - mean)(y_i - mean)'

    /// Throws IngestionError for non-finite entries, n <= p, or a singular sample covariance.
    static MvtData from_rows(const Matrix& rows);

    Eigen::Index dim() const { return mean.size(); }
    Matrix sample_covariance() const { return scatter / static_cast<double>(n - 1); }
};

struct MvtModelState {
    Vector delta;
    Matrix sigma;
    Matrix phi;
};

/// Test hooks. None of them are used by the applications.
struct ChainHooks {
    /// Drop the likelihood: delta and Phi then sample their prior and Sigma is held fixed.
    bool prior_only = false;
    /// Hold Sigma at this value (skips the Metropolis step).
    std::optional<Matrix> fixed_sigma;
    /// Hold Phi at this value, turning the delta prior into N(0, Phi).
    std::optional<Matrix> fixed_phi;
};

struct SamplerConfig {
    std::size_t n_draws = 100'000;
    /// Defaults to max(2000, n_draws / 10).
    std::optional<std::size_t> n_burnin;
    /// Random-walk sds for the lower triangle of Sigma in row-major order
    /// ((0,0), (1,0), (1,1), (2,0), ...). Empty: derived from the data and adapted.
    std::vector<double> rw_step_sds;
    /// Scale steps toward kTargetAcceptance during burn-in, then freeze them.
    bool adapt_steps = false;
    /// S_0 of the Phi prior. p x p for the unconstrained chain, 1 x 1 for the constrained one.
    Matrix prior_scale_matrix;
    /// Degrees of freedom of the Phi prior; defaults to the dimension of S_0 (a Cauchy prior).
    std::optional<double> prior_df;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::optional<MvtModelState> initial_state;
    /// Constrained chain only: delta_vec = delta * direction. Defaults to all ones.
    std::optional<Vector> direction;
    ChainHooks hooks;
};

inline constexpr double kTargetAcceptance = 0.3;

struct ChainOutput {
    Matrix delta_draws;  // n_draws x p (1 column for the constrained chain)
    std::vector<Matrix> sigma_draws;
    std::vector<Matrix> phi_draws;
    std::vector<double> acceptance_rates;  // per lower-triangle element of Sigma, post burn-in
    std::vector<double> step_sds;          // steps used after burn-in
    std::size_t n_burnin = 0;
    std::uint64_t seed = 0;
};

/// Number of free elements in the lower triangle of a p x p matrix.
constexpr std::size_t lower_triangle_size(Eigen::Index p) { return static_cast<std::size_t>(p * (p + 1) / 2); }

/// (row, col) of the k-th lower-triangle element in row-major order.
std::pair<Eigen::Index, Eigen::Index> lower_triangle_index(std::size_t k);

std::size_t default_burnin(std::size_t n_draws);

/// Step sizes for the Sigma random walk derived from the sampling sd of each covariance element.
std::vector<double> default_step_sds(const MvtData& data);

/// z-bar_Sigma = L_Sigma^{-1} * y-bar.
Vector standardized_mean(const MvtData& data, const Matrix& sigma);

/// delta ~ N(n (Phi^-1 + n I)^-1 zbar, (Phi^-1 + n I)^-1).
Vector gibbs_delta_step(const MvtModelState& state, const MvtData& data, Rng& rng);

/// Moments of the constrained conditional for delta_vec = delta * direction: precision
/// 1/phi + n v'v and mean n v'zbar / precision. With v = (1, 1) this is the 2n pooling.
struct ScalarNormal {
    double mean = 0.0;
    double variance = 1.0;
};
ScalarNormal constrained_delta_conditional(const MvtModelState& state, const MvtData& data, const Vector& direction);
double gibbs_delta_step_constrained(const MvtModelState& state, const MvtData& data, const Vector& direction, Rng& rng);

/// Phi ~ IW(prior_df + 1, S_0 + delta delta'). prior_df defaults to p.
Matrix gibbs_phi_step(const Vector& delta, const Matrix& prior_scale, Rng& rng, std::optional<double> prior_df = {});

/// Log of the Sigma full conditional up to a constant: normal log-likelihood of the data
/// with mean L_Sigma * delta_vec plus the Jeffreys term -(p+1)/2 log|Sigma|.
/// -inf when Sigma fails the eigenvalue floor.
double sigma_log_target(const Matrix& sigma, const Vector& delta_vec, const MvtData& data, bool with_likelihood = true);

struct SigmaUpdate {
    Matrix sigma;
    bool accepted = false;
};

/// One Metropolis update of lower-triangle element `element` by `increment` (mirrored),
/// accepted when log(u) < log R. Candidates failing the eigenvalue floor are rejected.
SigmaUpdate sigma_element_update(const Matrix& sigma, const Vector& delta_vec, const MvtData& data, std::size_t element,
                                 double increment, double u, bool with_likelihood = true);

struct SigmaStep {
    Matrix sigma;
    std::vector<bool> accepted;
};

/// Sweeps every lower-triangle element once in row-major order.
SigmaStep rw_sigma_step(const Matrix& sigma, const Vector& delta_vec, const MvtData& data, std::span<const double> step_sds,
                        Rng& rng, bool with_likelihood = true);

ChainOutput run_unconstrained_chain(const MvtData& data, const SamplerConfig& config);
ChainOutput run_unconstrained_chain(const Matrix& rows, const SamplerConfig& config);

ChainOutput run_constrained_chain(const MvtData& data, const SamplerConfig& config);
ChainOutput run_constrained_chain(const Matrix& rows, const SamplerConfig& config);

}  // namespace sdbf
