#pragma once

#include <sdbf/rng.hpp>

#include <Eigen/Core>
#include <cstddef>

namespace sdbf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalue floor used for every positive-definiteness test on covariance-type matrices.
inline constexpr double kPdEigenFloor = 1e-6;

struct CauchyParams {
    double location = 0.0;
    double scale = 1.0;
};

/// Location-scale Student t.
struct StudentTParams {
    double df = 1.0;
    double location = 0.0;
    double scale = 1.0;
};

/// Multivariate Cauchy (multivariate t with one degree of freedom) centred at zero.
struct MvCauchyParams {
    Matrix scale_matrix;
};

struct DirichletParams {
    Vector alpha;
};

/// Law of (xi1, xi2/2, xi4) for (xi1, xi2, xi4) ~ Dirichlet(alpha1, alpha2, alpha3).
struct ScaledDirichletParams {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double alpha3 = 1.0;
};

struct InverseWishartParams {
    double df = 1.0;
    Matrix scale;
};

// Univariate Cauchy. All throw InvalidParameter for a non-positive scale.
double cauchy_pdf(double x, const CauchyParams& params);
double cauchy_log_pdf(double x, const CauchyParams& params);
double cauchy_cdf(double x, const CauchyParams& params);
/// Pr(X > x).
double cauchy_survival(double x, const CauchyParams& params);
double sample_cauchy(const CauchyParams& params, Rng& rng);

double student_t_pdf(double x, const StudentTParams& params);
double student_t_log_pdf(double x, const StudentTParams& params);
double student_t_cdf(double x, const StudentTParams& params);

double normal_pdf(double x, double mean, double sd);
double normal_cdf(double x, double mean, double sd);

double mv_cauchy_log_pdf(const Vector& x, const MvCauchyParams& params);

/// Log of the multivariate beta function B(alpha) = prod Gamma(alpha_i) / Gamma(sum alpha_i).
double log_multivariate_beta(const Vector& alpha);

/// Dirichlet draws, one per row (n x k). Rows are nonnegative and sum to 1.
Matrix sample_dirichlet(const DirichletParams& params, std::size_t n, Rng& rng);
/// One Dirichlet draw written into `out` (size k).
void sample_dirichlet_into(const DirichletParams& params, Rng& rng, Eigen::Ref<Vector> out);

/// Density of (gamma1, gamma2) with gamma4 = 1 - gamma1 - 2*gamma2. Returns 0 outside the support.
double scaled_dirichlet_pdf(double gamma1, double gamma2, const ScaledDirichletParams& params);
/// Log density; -inf outside the support.
double scaled_dirichlet_log_pdf(double gamma1, double gamma2, const ScaledDirichletParams& params);

/// Inverse-Wishart draw via the Bartlett decomposition of Wishart(df, scale^-1).
Matrix sample_inverse_wishart(const InverseWishartParams& params, Rng& rng);
double inverse_wishart_log_pdf(const Matrix& x, const InverseWishartParams& params);

Vector sample_mv_normal(const Vector& mean, const Matrix& cov, Rng& rng);

/// Lower Cholesky factor. Throws DecompositionError carrying the failing leading-minor index.
Matrix cholesky_lower(const Matrix& m);

double min_eigenvalue(const Matrix& m);
/// Symmetric with minimum eigenvalue above kPdEigenFloor.
bool is_positive_definite(const Matrix& m);

}  // namespace sdbf
