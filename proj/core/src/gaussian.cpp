#include "ampu/gaussian.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace ampu {

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double wick(const Eigen::MatrixXd& Sigma, std::vector<int>& m,
            std::map<std::vector<int>, double>& memo) {
    int total = std::accumulate(m.begin(), m.end(), 0);
    if (total == 0) return 1.0;
    if (total % 2 == 1) return 0.0;
    auto it = memo.find(m);
    if (it != memo.end()) return it->second;

    int a = 0;
    while (m[a] == 0) ++a;
    m[a] -= 1;
    double total_val = 0.0;
    for (int b = 0; b < static_cast<int>(m.size()); ++b) {
        if (m[b] == 0 || Sigma(a, b) == 0.0) continue;
        int mult = m[b];
        m[b] -= 1;
        total_val += mult * Sigma(a, b) * wick(Sigma, m, memo);
        m[b] += 1;
    }
    m[a] += 1;
    memo.emplace(m, total_val);
    return total_val;
}

}  // namespace

double gaussian_monomial_moment(const Eigen::MatrixXd& Sigma,
                                const std::vector<int>& exponents) {
    if (static_cast<int>(exponents.size()) != Sigma.rows())
        throw std::invalid_argument("exponent/covariance dimension mismatch");
    int total = std::accumulate(exponents.begin(), exponents.end(), 0);
    if (total > 16) throw std::invalid_argument("monomial degree above cap 16");
    std::vector<int> m = exponents;
    std::map<std::vector<int>, double> memo;
    return wick(Sigma, m, memo);
}

namespace {

void check_psd(const Eigen::MatrixXd& Sigma) {
    if (Sigma.rows() != Sigma.cols())
        throw std::invalid_argument("covariance must be square");
    if (Sigma.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sigma);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::domain_error("covariance is not positive semidefinite");
}

}  // namespace

double gaussian_poly_moment(const Eigen::MatrixXd& Sigma, const MultiPoly& poly) {
    check_psd(Sigma);
    if (poly.nvars() != Sigma.rows())
        throw std::invalid_argument("polynomial/covariance dimension mismatch");
    double total = 0.0;
    std::map<std::vector<int>, double> memo;
    for (const auto& [k, c] : poly.terms()) {
        std::vector<int> m = k;
        total += c * wick(Sigma, m, memo);
    }
    return total;
}

GaussianMixture GaussianMixture::point(const Eigen::VectorXd& atom) {
    GaussianMixture g;
    g.dim = static_cast<int>(atom.size());
    MixtureComponent comp;
    comp.weight = 1.0;
    comp.mean = atom;
    comp.cov = Eigen::MatrixXd::Zero(g.dim, g.dim);
    g.components.push_back(std::move(comp));
    return g;
}

GaussianMixture GaussianMixture::none() { return GaussianMixture{}; }

void GaussianMixture::validate() const {
    double w = 0.0;
    for (const auto& c : components) {
        if (c.weight < 0.0) throw std::invalid_argument("negative mixture weight");
        if (c.mean.size() != dim || c.cov.rows() != dim || c.cov.cols() != dim)
            throw std::invalid_argument("mixture component dimension mismatch");
        w += c.weight;
    }
    if (dim > 0 && std::abs(w - 1.0) > 1e-12)
        throw std::invalid_argument("mixture weights must sum to 1");
}

double gaussian_poly_moment(const Eigen::MatrixXd& Sigma, const MultiPoly& poly,
                            const GaussianMixture& mixture) {
    const int q = static_cast<int>(Sigma.rows());
    if (mixture.dim == 0) return gaussian_poly_moment(Sigma, poly);
    mixture.validate();
    if (poly.nvars() != q + mixture.dim)
        throw std::invalid_argument("polynomial must span Z and Y variables");
    check_psd(Sigma);
    double total = 0.0;
    for (const auto& comp : mixture.components) {
        MultiPoly p = poly;
        for (int d = 0; d < mixture.dim; ++d)
            if (comp.mean[d] != 0.0) p = p.shifted(q + d, comp.mean[d]);
        Eigen::MatrixXd ext = Eigen::MatrixXd::Zero(q + mixture.dim, q + mixture.dim);
        ext.topLeftCorner(q, q) = Sigma;
        ext.bottomRightCorner(mixture.dim, mixture.dim) = comp.cov;
        total += comp.weight * gaussian_poly_moment(ext, p);
    }
    return total;
}

namespace {

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
// polynomials (orthogonal for the N(0,1) weight): zero diagonal,
// off-diagonal sqrt(j). Nodes are the eigenvalues, weights the squared
// first components of the normalized eigenvectors.
QuadratureRule build_hermite(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int j = 1; j < n; ++j) J(j, j - 1) = J(j - 1, j) = std::sqrt(double(j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights = es.eigenvectors().row(0).transpose().array().square();
    return rule;
}

}  // namespace

const QuadratureRule& gauss_hermite(int n) {
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_hermite(n)).first;
    return it->second;
}

double gauss_expect_1d(double var, const std::function<double(double)>& f, int n) {
    if (var < 0.0) throw std::domain_error("negative variance");
    if (var == 0.0) return f(0.0);
    const auto& rule = gauss_hermite(n);
    double s = std::sqrt(var), total = 0.0;
    for (int i = 0; i < n; ++i) total += rule.weights[i] * f(s * rule.nodes[i]);
    return total;
}

double gauss_expect_2d(const Eigen::Matrix2d& cov,
                       const std::function<double(double, double)>& f, int n) {
    // Eigendecomposition instead of Cholesky: two-time covariances become
    // numerically singular as the correlation approaches 1, so tiny negative
    // eigenvalues (relative to scale) are clipped rather than rejected.
    Eigen::Matrix2d sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
    double scale = std::max(std::abs(es.eigenvalues()[1]), 1.0);
    if (es.eigenvalues()[0] < -1e-10 * scale)
        throw std::domain_error("2x2 covariance is not positive semidefinite");
    Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    Eigen::Matrix2d L = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    const auto& rule = gauss_hermite(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = rule.nodes[i];
        double wi = rule.weights[i];
        for (int j = 0; j < n; ++j) {
            double v = rule.nodes[j];
            double z1 = L(0, 0) * u + L(0, 1) * v;
            double z2 = L(1, 0) * u + L(1, 1) * v;
            total += wi * rule.weights[j] * f(z1, z2);
        }
    }
    return total;
}

}  // namespace ampu
