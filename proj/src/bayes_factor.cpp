#include <sdbf/bayes_factor.hpp>

#include <sdbf/error.hpp>

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace sdbf {

namespace {

double relative_variance(double value, double se) {
    if (se == 0.0) return 0.0;
    return (se / value) * (se / value);
}

}  // namespace

DensityEstimate exact_density(double value) {
    DensityEstimate d;
    d.value = value;
    return d;
}

McEstimate exact_estimate(double value) {
    McEstimate e;
    e.value = value;
    return e;
}

void HypothesisSpec::validate() const {
    const Eigen::Index k = equality_point.size() + order_thresholds.size();
    if (transform.rows() != transform.cols()) throw InvalidParameter("hypothesis: transform must be square");
    if (k > transform.rows()) throw InvalidParameter("hypothesis: more constraints than transformed parameters");
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != transform.rows()) {
        throw InvalidParameter("hypothesis: need one label per transformed parameter");
    }
    const Eigen::FullPivLU<Matrix> lu(transform);
    if (!lu.isInvertible()) throw InvalidParameter("hypothesis: transform is not invertible");
}

Vector HypothesisSpec::to_theta(const Vector& key) const { return transform * key; }

Vector HypothesisSpec::from_theta(const Vector& theta) const { return transform.fullPivLu().solve(theta); }

double assemble_log_bf(const SdIngredients& in) {
    const double prior = in.prior_density_at_re.value;
    const double prob = in.completed_prior_prob.value;
    if (!(prior > 0.0)) throw DivisionError("assemble_bf: prior density at the equality point is zero");
    if (!(prob > 0.0)) throw DivisionError("assemble_bf: completed prior probability of the order constraints is zero");
    const double post = in.posterior_density_at_re.value;
    const double expectation = in.prior_ratio_expectation.value;
    if (!std::isfinite(post) || !std::isfinite(expectation) || post < 0.0 || expectation < 0.0) {
        throw InvalidParameter("assemble_bf: posterior density and expectation must be finite and nonnegative");
    }
    if (post == 0.0 || expectation == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(post) - std::log(prior) - std::log(prob) + std::log(expectation);
}

double assemble_bf(const SdIngredients& ingredients) { return std::exp(assemble_log_bf(ingredients)); }

double assemble_bf_std_error(const SdIngredients& in) {
    const double bf = assemble_bf(in);
    if (bf == 0.0) return 0.0;
    const double rel = relative_variance(in.posterior_density_at_re.value, in.posterior_density_at_re.std_error) +
                       relative_variance(in.prior_density_at_re.value, in.prior_density_at_re.std_error) +
                       relative_variance(in.completed_prior_prob.value, in.completed_prior_prob.std_error) +
                       relative_variance(in.prior_ratio_expectation.value, in.prior_ratio_expectation.std_error);
    return bf * std::sqrt(rel);
}

double assemble_bf_order_reduction(double post_density, double prior_density, double post_order_prob,
                                   double prior_order_prob) {
    if (!(prior_density > 0.0)) throw DivisionError("assemble_bf_order_reduction: prior density is zero");
    if (!(prior_order_prob > 0.0)) throw DivisionError("assemble_bf_order_reduction: prior order probability is zero");
    if (!(post_density >= 0.0) || !(post_order_prob >= 0.0) || post_order_prob > 1.0 || prior_order_prob > 1.0) {
        throw InvalidParameter("assemble_bf_order_reduction: inputs out of range");
    }
    return (post_density / prior_density) * (post_order_prob / prior_order_prob);
}

ModelProbabilities posterior_model_probs(double bf_cu, double prior_odds) {
    if (!(bf_cu >= 0.0)) throw InvalidParameter("posterior_model_probs: Bayes factor must be nonnegative");
    if (!(prior_odds > 0.0) || !std::isfinite(prior_odds)) {
        throw InvalidParameter("posterior_model_probs: prior odds must be positive");
    }
    if (std::isinf(bf_cu)) return {1.0, 0.0};
    // prob_u = 1 / (1 + bf * odds), computed without forming bf * odds when it overflows.
    const double log_odds = std::log(bf_cu) + std::log(prior_odds);
    const double prob_u = 1.0 / (1.0 + std::exp(log_odds));
    return {1.0 - prob_u, prob_u};
}

BayesFactorReport make_report(std::string analysis, const SdIngredients& ingredients, double prior_odds, std::uint64_t seed) {
    BayesFactorReport r;
    r.analysis = std::move(analysis);
    r.ingredients = ingredients;
    r.log_bf_cu = assemble_log_bf(ingredients);
    r.bf_cu = std::exp(r.log_bf_cu);
    r.bf_std_error = assemble_bf_std_error(ingredients);
    const auto probs = posterior_model_probs(r.bf_cu, prior_odds);
    r.posterior_prob_c = probs.prob_c;
    r.posterior_prob_u = probs.prob_u;
    r.prior_odds = prior_odds;
    r.seed = seed;
    return r;
}

}  // namespace sdbf
