#include <sdbf/mcmc.hpp>

#include <sdbf/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sdbf {

namespace {

constexpr std::size_t kAdaptWindow = 50;

Matrix invert_lower(const Matrix& l) {
    return l.triangularView<Eigen::Lower>().solve(Matrix::Identity(l.rows(), l.cols()));
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_finite_state(const MvtModelState& s, std::size_t iteration) {
    if (!s.delta.allFinite() || !s.phi.allFinite() || !s.sigma.allFinite()) {
        throw ChainError("chain produced a non-finite state at iteration " + std::to_string(iteration), iteration);
    }
}

void validate_config(const SamplerConfig& config, Eigen::Index phi_dim, std::size_t n_elements) {
    if (config.n_draws < 1) throw InvalidParameter("sampler: n_draws must be at least 1");
    if (config.prior_scale_matrix.rows() != phi_dim || config.prior_scale_matrix.cols() != phi_dim) {
        throw InvalidParameter("sampler: prior scale matrix must be " + std::to_string(phi_dim) + "x" + std::to_string(phi_dim));
    }
    if (!is_positive_definite(config.prior_scale_matrix)) {
        throw InvalidParameter("sampler: prior scale matrix must be positive definite");
    }
    if (!config.rw_step_sds.empty()) {
        if (config.rw_step_sds.size() != n_elements) {
            throw InvalidParameter("sampler: expected " + std::to_string(n_elements) + " random-walk step sds");
        }
        for (double s : config.rw_step_sds) {
            if (!(s > 0.0) || !std::isfinite(s)) throw InvalidParameter("sampler: random-walk step sds must be positive");
        }
    }
    if (config.prior_df && !(*config.prior_df > static_cast<double>(phi_dim) - 1.0)) {
        throw InvalidParameter("sampler: prior df must exceed dimension - 1");
    }
}

// Shared driver; `draw_delta` updates state.delta and `expand` maps it to the p-vector
// entering the likelihood.
template <class DrawDelta, class Expand>
ChainOutput run_chain(const MvtData& data, const SamplerConfig& config, MvtModelState state, DrawDelta&& draw_delta,
                      Expand&& expand) {
    const Eigen::Index p = data.dim();
    const std::size_t n_elements = lower_triangle_size(p);
    const double phi_df = config.prior_df.value_or(static_cast<double>(config.prior_scale_matrix.rows()));
    const bool with_likelihood = !config.hooks.prior_only;
    const bool sample_sigma = with_likelihood && !config.hooks.fixed_sigma;

    std::vector<double> steps = config.rw_step_sds.empty() ? default_step_sds(data) : config.rw_step_sds;
    const bool adapt = config.adapt_steps || config.rw_step_sds.empty();
    const std::size_t burnin = config.n_burnin.value_or(default_burnin(config.n_draws));

    Rng rng(config.seed, config.stream_id);
    ChainOutput out;
    out.seed = config.seed;
    out.n_burnin = burnin;
    out.delta_draws.resize(static_cast<Eigen::Index>(config.n_draws), state.delta.size());
    out.sigma_draws.reserve(config.n_draws);
    out.phi_draws.reserve(config.n_draws);

    std::vector<std::size_t> window_accepts(n_elements, 0), accepts(n_elements, 0);
    const std::size_t total = burnin + config.n_draws;
    for (std::size_t it = 0; it < total; ++it) {
        state.delta = draw_delta(state, rng);
        if (config.hooks.fixed_phi) {
            state.phi = *config.hooks.fixed_phi;
        } else {
            state.phi = gibbs_phi_step(state.delta, config.prior_scale_matrix, rng, phi_df);
        }
        if (sample_sigma) {
            SigmaStep step = rw_sigma_step(state.sigma, expand(state.delta), data, steps, rng, with_likelihood);
            state.sigma = std::move(step.sigma);
            for (std::size_t k = 0; k < n_elements; ++k) {
                if (!step.accepted[k]) continue;
                ++window_accepts[k];
                if (it >= burnin) ++accepts[k];
            }
        }
        check_finite_state(state, it);

        if (it < burnin && adapt && sample_sigma && (it + 1) % kAdaptWindow == 0) {
            for (std::size_t k = 0; k < n_elements; ++k) {
                const double rate = static_cast<double>(window_accepts[k]) / static_cast<double>(kAdaptWindow);
                steps[k] *= std::exp(2.0 * (rate - kTargetAcceptance));
                window_accepts[k] = 0;
            }
        }
        if (it >= burnin) {
            const auto row = static_cast<Eigen::Index>(it - burnin);
            out.delta_draws.row(row) = state.delta.transpose();
            out.sigma_draws.push_back(state.sigma);
            out.phi_draws.push_back(state.phi);
        }
    }
    out.acceptance_rates.resize(n_elements);
    for (std::size_t k = 0; k < n_elements; ++k) {
        out.acceptance_rates[k] =
            sample_sigma ? static_cast<double>(accepts[k]) / static_cast<double>(config.n_draws) : 0.0;
    }
    out.step_sds = std::move(steps);
    return out;
}

Matrix initial_sigma(const MvtData& data, const SamplerConfig& config) {
    if (config.hooks.fixed_sigma) return *config.hooks.fixed_sigma;
    return data.sample_covariance();
}

}  // namespace

MvtData MvtData::from_rows(const Matrix& rows) {
    if (rows.cols() < 1) throw IngestionError("data must have at least one column");
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        if (!rows.row(i).allFinite()) throw IngestionError("row " + std::to_string(i + 1) + " has a non-finite value", static_cast<std::size_t>(i + 1));
    }
    if (rows.rows() <= rows.cols()) {
        throw IngestionError("need more rows than columns (n > p), got n=" + std::to_string(rows.rows()) +
                             ", p=" + std::to_string(rows.cols()));
    }
    MvtData d;
    d.n = rows.rows();
    d.mean = rows.colwise().mean().transpose();
    const Matrix centered = rows.rowwise() - d.mean.transpose();
    d.scatter = centered.transpose() * centered;
    if (!is_positive_definite(d.sample_covariance())) {
        throw IngestionError("sample covariance is singular or nearly singular");
    }
    return d;
}

std::pair<Eigen::Index, Eigen::Index> lower_triangle_index(std::size_t k) {
    Eigen::Index row = 0;
    auto remaining = static_cast<Eigen::Index>(k);
    while (remaining > row) {
        remaining -= row + 1;
        ++row;
    }
    return {row, remaining};
}

std::size_t default_burnin(std::size_t n_draws) { return std::max<std::size_t>(2000, n_draws / 10); }

std::vector<double> default_step_sds(const MvtData& data) {
    const Matrix s = data.sample_covariance();
    const auto n = static_cast<double>(data.n);
    const std::size_t m = lower_triangle_size(data.dim());
    std::vector<double> steps(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto [i, j] = lower_triangle_index(k);
        steps[k] = 1.5 * std::sqrt((s(i, i) * s(j, j) + s(i, j) * s(i, j)) / n);
    }
    return steps;
}

Vector standardized_mean(const MvtData& data, const Matrix& sigma) {
    const Matrix l = cholesky_lower(sigma);
    return l.triangularView<Eigen::Lower>().solve(data.mean);
}

Vector gibbs_delta_step(const MvtModelState& state, const MvtData& data, Rng& rng) {
    const Eigen::Index p = state.phi.rows();
    const Matrix w = invert_lower(cholesky_lower(state.phi));
    const Matrix phi_inv = symmetrize(w.transpose() * w);
    const auto n = static_cast<double>(data.n);
    const Matrix precision = phi_inv + n * Matrix::Identity(p, p);
    const Matrix lp = cholesky_lower(precision);
    const Matrix lp_inv = invert_lower(lp);
    const Matrix cov = symmetrize(lp_inv.transpose() * lp_inv);
    const Vector mean = cov * (n * standardized_mean(data, state.sigma));
    return sample_mv_normal(mean, cov, rng);
}

ScalarNormal constrained_delta_conditional(const MvtModelState& state, const MvtData& data, const Vector& direction) {
    const auto n = static_cast<double>(data.n);
    const double phi = state.phi(0, 0);
    if (!(phi > 0.0)) throw InvalidParameter("constrained delta step: phi must be positive");
    const double precision = 1.0 / phi + n * direction.squaredNorm();
    return {n * direction.dot(standardized_mean(data, state.sigma)) / precision, 1.0 / precision};
}

double gibbs_delta_step_constrained(const MvtModelState& state, const MvtData& data, const Vector& direction, Rng& rng) {
    const ScalarNormal c = constrained_delta_conditional(state, data, direction);
    return c.mean + std::sqrt(c.variance) * rng.normal();
}

Matrix gibbs_phi_step(const Vector& delta, const Matrix& prior_scale, Rng& rng, std::optional<double> prior_df) {
    const double df = prior_df.value_or(static_cast<double>(delta.size()));
    return sample_inverse_wishart({df + 1.0, prior_scale + delta * delta.transpose()}, rng);
}

double sigma_log_target(const Matrix& sigma, const Vector& delta_vec, const MvtData& data, bool with_likelihood) {
    if (!is_positive_definite(sigma)) return -std::numeric_limits<double>::infinity();
    const auto p = static_cast<double>(sigma.rows());
    const Matrix l = cholesky_lower(sigma);
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    double target = -0.5 * (p + 1.0) * log_det;
    if (with_likelihood) {
        const auto n = static_cast<double>(data.n);
        const Matrix w = invert_lower(l);
        // Residual of the mean in standardized coordinates: L^-1 ybar - delta.
        const Vector r = w * data.mean - delta_vec;
        const double quad = (w * data.scatter * w.transpose()).trace() + n * r.squaredNorm();
        target += -0.5 * n * log_det - 0.5 * quad;
    }
    return target;
}

SigmaUpdate sigma_element_update(const Matrix& sigma, const Vector& delta_vec, const MvtData& data, std::size_t element,
                                 double increment, double u, bool with_likelihood) {
    const auto [i, j] = lower_triangle_index(element);
    Matrix candidate = sigma;
    candidate(i, j) += increment;
    if (i != j) candidate(j, i) = candidate(i, j);
    if (!is_positive_definite(candidate)) return {sigma, false};
    const double log_r = sigma_log_target(candidate, delta_vec, data, with_likelihood) -
                         sigma_log_target(sigma, delta_vec, data, with_likelihood);
    if (std::log(u) < log_r) return {std::move(candidate), true};
    return {sigma, false};
}

SigmaStep rw_sigma_step(const Matrix& sigma, const Vector& delta_vec, const MvtData& data, std::span<const double> step_sds,
                        Rng& rng, bool with_likelihood) {
    SigmaStep out{sigma, std::vector<bool>(step_sds.size(), false)};
    for (std::size_t k = 0; k < step_sds.size(); ++k) {
        const double increment = step_sds[k] * rng.normal();
        const double u = rng.uniform();
        SigmaUpdate upd = sigma_element_update(out.sigma, delta_vec, data, k, increment, u, with_likelihood);
        out.sigma = std::move(upd.sigma);
        out.accepted[k] = upd.accepted;
    }
    return out;
}

ChainOutput run_unconstrained_chain(const MvtData& data, const SamplerConfig& config) {
    const Eigen::Index p = data.dim();
    validate_config(config, p, lower_triangle_size(p));
    MvtModelState init;
    if (config.initial_state) {
        init = *config.initial_state;
    } else {
        init.sigma = initial_sigma(data, config);
        init.delta = config.hooks.prior_only ? Vector::Zero(p) : standardized_mean(data, init.sigma);
        init.phi = config.hooks.fixed_phi.value_or(config.prior_scale_matrix);
    }
    if (init.delta.size() != p || init.phi.rows() != p || init.sigma.rows() != p) {
        throw InvalidParameter("unconstrained chain: initial state has the wrong dimensions");
    }
    const bool prior_only = config.hooks.prior_only;
    return run_chain(
        data, config, std::move(init),
        [&](const MvtModelState& s, Rng& rng) -> Vector {
            if (prior_only) return sample_mv_normal(Vector::Zero(p), s.phi, rng);
            return gibbs_delta_step(s, data, rng);
        },
        [](const Vector& delta) -> const Vector& { return delta; });
}

ChainOutput run_unconstrained_chain(const Matrix& rows, const SamplerConfig& config) {
    return run_unconstrained_chain(MvtData::from_rows(rows), config);
}

ChainOutput run_constrained_chain(const MvtData& data, const SamplerConfig& config) {
    const Eigen::Index p = data.dim();
    validate_config(config, 1, lower_triangle_size(p));
    const Vector direction = config.direction.value_or(Vector::Ones(p));
    if (direction.size() != p || !(direction.squaredNorm() > 0.0)) {
        throw InvalidParameter("constrained chain: direction must be a nonzero p-vector");
    }
    MvtModelState init;
    if (config.initial_state) {
        init = *config.initial_state;
    } else {
        init.sigma = initial_sigma(data, config);
        init.delta = Vector::Constant(1, config.hooks.prior_only
                                             ? 0.0
                                             : direction.dot(standardized_mean(data, init.sigma)) / direction.squaredNorm());
        init.phi = config.hooks.fixed_phi.value_or(config.prior_scale_matrix);
    }
    if (init.delta.size() != 1 || init.phi.rows() != 1 || init.sigma.rows() != p) {
        throw InvalidParameter("constrained chain: initial state has the wrong dimensions");
    }
    const bool prior_only = config.hooks.prior_only;
    return run_chain(
        data, config, std::move(init),
        [&](const MvtModelState& s, Rng& rng) -> Vector {
            if (prior_only) return Vector::Constant(1, std::sqrt(s.phi(0, 0)) * rng.normal());
            return Vector::Constant(1, gibbs_delta_step_constrained(s, data, direction, rng));
        },
        [&](const Vector& delta) -> Vector { return delta[0] * direction; });
}

ChainOutput run_constrained_chain(const Matrix& rows, const SamplerConfig& config) {
    return run_constrained_chain(MvtData::from_rows(rows), config);
}

}  // namespace sdbf
