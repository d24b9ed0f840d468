#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ampu/poly.hpp"

namespace ampu {

// Standard normal density and distribution function. Tail values are
// computed through erfc so that normal_cdf(-40) is still accurate.
double normal_pdf(double x);
double normal_cdf(double x);

// E prod_i Z_i^{m_i} for Z ~ N(0, Sigma), by the Isserlis pairing formula.
// Total degree is capped at 16 (the acceptance-level cap is 8; the slack
// covers products formed internally by two-time recursions).
double gaussian_monomial_moment(const Eigen::MatrixXd& Sigma,
                                const std::vector<int>& exponents);

// E p(Z) for Z ~ N(0, Sigma); Sigma must be positive semidefinite within
// -1e-10 on its smallest eigenvalue.
double gaussian_poly_moment(const Eigen::MatrixXd& Sigma, const MultiPoly& poly);

// One component of a finite Gaussian mixture. A zero covariance row/column
// makes that coordinate a point mass at its mean.
struct MixtureComponent {
    double weight = 1.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

struct GaussianMixture {
    int dim = 0;
    std::vector<MixtureComponent> components;

    static GaussianMixture point(const Eigen::VectorXd& atom);
    static GaussianMixture none();  // dim 0: no label variables
    void validate() const;
};

// E p(Z, Y) where p has nvars = Sigma.rows() + mixture.dim, the first block
// of variables is Z ~ N(0, Sigma) and the trailing block is Y ~ mixture,
// independent of Z. Exact via Wick on each mixture component.
double gaussian_poly_moment(const Eigen::MatrixXd& Sigma, const MultiPoly& poly,
                            const GaussianMixture& mixture);

// Gauss-Hermite rule for integrals against the standard normal weight:
// E f(Z) ~= sum_i w_i f(x_i), Z ~ N(0,1). Nodes by Newton iteration on the
// physicists' Hermite polynomials, then rescaled.
struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

const QuadratureRule& gauss_hermite(int n);

// E f(Z1, Z2) for (Z1,Z2) centered Gaussian with the given 2x2 covariance,
// by tensorized Gauss-Hermite quadrature after a Cholesky transform.
double gauss_expect_2d(const Eigen::Matrix2d& cov,
                       const std::function<double(double, double)>& f, int n = 41);

double gauss_expect_1d(double var, const std::function<double(double)>& f,
                       int n = 41);

}  // namespace ampu
