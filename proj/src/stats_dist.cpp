#include <sdbf/stats_dist.hpp>

#include <sdbf/error.hpp>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace sdbf {

namespace {

void check_scale(double scale, const char* what) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidParameter(std::string(what) + ": scale must be positive and finite, got " + std::to_string(scale));
    }
}

void check_alpha(const Vector& alpha) {
    if (alpha.size() < 2) throw InvalidParameter("dirichlet: need at least two components");
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) {
            throw InvalidParameter("dirichlet: alpha[" + std::to_string(i) + "] must be positive");
        }
    }
}

void check_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidParameter(std::string(what) + ": matrix must be square and non-empty");
}

// Multivariate log-gamma, log Gamma_p(a).
double log_mv_gamma(double a, Eigen::Index p) {
    double r = 0.25 * static_cast<double>(p * (p - 1)) * std::log(std::numbers::pi);
    for (Eigen::Index j = 0; j < p; ++j) r += std::lgamma(a - 0.5 * static_cast<double>(j));
    return r;
}

double log_det_from_cholesky(const Matrix& l) {
    return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace

double cauchy_pdf(double x, const CauchyParams& params) {
    check_scale(params.scale, "cauchy");
    const double z = (x - params.location) / params.scale;
    return 1.0 / (std::numbers::pi * params.scale * (1.0 + z * z));
}

double cauchy_log_pdf(double x, const CauchyParams& params) {
    check_scale(params.scale, "cauchy");
    const double z = (x - params.location) / params.scale;
    return -std::log(std::numbers::pi * params.scale) - std::log1p(z * z);
}

double cauchy_cdf(double x, const CauchyParams& params) {
    check_scale(params.scale, "cauchy");
    const double z = (x - params.location) / params.scale;
    // atan2 keeps the tails accurate and handles +-inf.
    return z < 0.0 ? std::atan2(1.0, -z) / std::numbers::pi : 1.0 - std::atan2(1.0, z) / std::numbers::pi;
}

double cauchy_survival(double x, const CauchyParams& params) {
    check_scale(params.scale, "cauchy");
    const double z = (x - params.location) / params.scale;
    return z > 0.0 ? std::atan2(1.0, z) / std::numbers::pi : 1.0 - std::atan2(1.0, -z) / std::numbers::pi;
}

double sample_cauchy(const CauchyParams& params, Rng& rng) {
    check_scale(params.scale, "cauchy");
    return params.location + params.scale * std::tan(std::numbers::pi * (rng.uniform() - 0.5));
}

double student_t_log_pdf(double x, const StudentTParams& params) {
    check_scale(params.scale, "student_t");
    if (!(params.df > 0.0)) throw InvalidParameter("student_t: df must be positive");
    const double nu = params.df;
    const double z = (x - params.location) / params.scale;
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi) -
           std::log(params.scale) - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

double student_t_pdf(double x, const StudentTParams& params) {
    return std::exp(student_t_log_pdf(x, params));
}

double student_t_cdf(double x, const StudentTParams& params) {
    check_scale(params.scale, "student_t");
    if (!(params.df > 0.0)) throw InvalidParameter("student_t: df must be positive");
    const double z = (x - params.location) / params.scale;
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t_distribution<double>(params.df), z);
}

double normal_pdf(double x, double mean, double sd) {
    check_scale(sd, "normal");
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double sd) {
    check_scale(sd, "normal");
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double mv_cauchy_log_pdf(const Vector& x, const MvCauchyParams& params) {
    check_square(params.scale_matrix, "mv_cauchy");
    const Matrix l = cholesky_lower(params.scale_matrix);
    const auto p = static_cast<double>(x.size());
    const Vector w = l.triangularView<Eigen::Lower>().solve(x);
    return std::lgamma(0.5 * (1.0 + p)) - std::lgamma(0.5) - 0.5 * p * std::log(std::numbers::pi) -
           0.5 * log_det_from_cholesky(l) - 0.5 * (1.0 + p) * std::log1p(w.squaredNorm());
}

double log_multivariate_beta(const Vector& alpha) {
    double r = -std::lgamma(alpha.sum());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) r += std::lgamma(alpha[i]);
    return r;
}

void sample_dirichlet_into(const DirichletParams& params, Rng& rng, Eigen::Ref<Vector> out) {
    const Eigen::Index k = params.alpha.size();
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        out[i] = rng.gamma(params.alpha[i]);
        total += out[i];
    }
    // All gammas underflowing to zero is only possible for tiny alphas; fall back to a vertex.
    if (!(total > 0.0)) {
        out.setZero();
        out[static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(k))] = 1.0;
        return;
    }
    out /= total;
}

Matrix sample_dirichlet(const DirichletParams& params, std::size_t n, Rng& rng) {
    check_alpha(params.alpha);
    if (n == 0) throw InvalidParameter("sample_dirichlet: n must be at least 1");
    const Eigen::Index k = params.alpha.size();
    Matrix draws(static_cast<Eigen::Index>(n), k);
    Vector row(k);
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
        sample_dirichlet_into(params, rng, row);
        draws.row(r) = row.transpose();
    }
    return draws;
}

double scaled_dirichlet_log_pdf(double gamma1, double gamma2, const ScaledDirichletParams& params) {
    const auto& [a1, a2, a3] = params;
    if (!(a1 > 0.0) || !(a2 > 0.0) || !(a3 > 0.0)) throw InvalidParameter("scaled_dirichlet: alphas must be positive");
    const double gamma4 = 1.0 - gamma1 - 2.0 * gamma2;
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0) || !(gamma4 > 0.0)) return -std::numeric_limits<double>::infinity();
    const double log_beta = std::lgamma(a1) + std::lgamma(a2) + std::lgamma(a3) - std::lgamma(a1 + a2 + a3);
    return a2 * std::numbers::ln2 - log_beta + (a1 - 1.0) * std::log(gamma1) + (a2 - 1.0) * std::log(gamma2) +
           (a3 - 1.0) * std::log(gamma4);
}

double scaled_dirichlet_pdf(double gamma1, double gamma2, const ScaledDirichletParams& params) {
    return std::exp(scaled_dirichlet_log_pdf(gamma1, gamma2, params));
}

Matrix sample_inverse_wishart(const InverseWishartParams& params, Rng& rng) {
    check_square(params.scale, "inverse_wishart");
    const Eigen::Index p = params.scale.rows();
    if (!(params.df > static_cast<double>(p) - 1.0)) {
        throw InvalidParameter("inverse_wishart: df must exceed dimension - 1");
    }
    Matrix scale_chol;
    try {
        scale_chol = cholesky_lower(params.scale);
    } catch (const DecompositionError& e) {
        throw InvalidParameter(std::string("inverse_wishart: scale is not positive definite (") + e.what() + ")");
    }
    // Wishart(df, scale^-1) = C A A' C' with C = chol(scale^-1). Working with the
    // inverse directly: scale^-1 = L^-T L^-1, so C = L^-T is upper; use the
    // lower factor of scale^-1 instead for a lower-triangular C.
    const Matrix inv_scale = scale_chol.triangularView<Eigen::Lower>().solve(Matrix::Identity(p, p));
    const Matrix c = cholesky_lower(inv_scale.transpose() * inv_scale);

    Matrix a = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        a(i, i) = std::sqrt(rng.chi_squared(params.df - static_cast<double>(i)));
        for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
    }
    // W = (C A)(C A)'; W^-1 = (C A)^-T (C A)^-1.
    const Matrix ca = c * a;
    const Matrix ca_inv = ca.triangularView<Eigen::Lower>().solve(Matrix::Identity(p, p));
    Matrix out = ca_inv.transpose() * ca_inv;
    return 0.5 * (out + out.transpose());
}

double inverse_wishart_log_pdf(const Matrix& x, const InverseWishartParams& params) {
    check_square(params.scale, "inverse_wishart");
    const Eigen::Index p = params.scale.rows();
    const double nu = params.df;
    const Matrix lx = cholesky_lower(x);
    const Matrix ls = cholesky_lower(params.scale);
    const Matrix x_inv = lx.triangularView<Eigen::Lower>().solve(Matrix::Identity(p, p));
    const double trace = (x_inv.transpose() * x_inv * params.scale).trace();
    const auto pd = static_cast<double>(p);
    return 0.5 * nu * log_det_from_cholesky(ls) - 0.5 * nu * pd * std::numbers::ln2 - log_mv_gamma(0.5 * nu, p) -
           0.5 * (nu + pd + 1.0) * log_det_from_cholesky(lx) - 0.5 * trace;
}

Vector sample_mv_normal(const Vector& mean, const Matrix& cov, Rng& rng) {
    check_square(cov, "mv_normal");
    if (cov.rows() != mean.size()) throw InvalidParameter("mv_normal: mean and covariance dimensions differ");
    Matrix l;
    try {
        l = cholesky_lower(cov);
    } catch (const DecompositionError& e) {
        throw InvalidParameter(std::string("mv_normal: covariance is not positive definite (") + e.what() + ")");
    }
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + l.triangularView<Eigen::Lower>() * z;
}

Matrix cholesky_lower(const Matrix& m) {
    if (m.rows() != m.cols()) throw InvalidParameter("cholesky_lower: matrix must be square");
    const Eigen::Index p = m.rows();
    Matrix l = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double d = m(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw DecompositionError("cholesky_lower: leading minor " + std::to_string(j + 1) + " is not positive",
                                     static_cast<std::size_t>(j));
        }
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < p; ++i) {
            double s = m(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

double min_eigenvalue(const Matrix& m) {
    if (m.rows() == 2 && m.cols() == 2) {
        const double half_trace = 0.5 * (m(0, 0) + m(1, 1));
        const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
        return half_trace - std::hypot(half_diff, 0.5 * (m(0, 1) + m(1, 0)));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

bool is_positive_definite(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) return false;
    if (!m.allFinite()) return false;
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    return min_eigenvalue(m) > kPdEigenFloor;
}

}  // namespace sdbf
