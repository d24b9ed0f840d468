#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ampu/amp_symmetric.hpp"
#include "ampu/gaussian.hpp"

namespace ampu {

// Rectangular AMP instance: m x n matrix with E A_ij^2 = 1/m, iterate
// dimension q, component functions f (x side, labels Y) and h (z side,
// labels W).
struct BipartiteInstance {
    Eigen::MatrixXd A;  // m x n
    double delta = 0.0;  // m/n
    int q = 1;
    ComponentFamily f;  // applied to x^t with labels Y
    ComponentFamily h;  // applied to z^t with labels W
    Eigen::MatrixXd x0;        // n x q
    Eigen::MatrixXd labels_y;  // n x f.label_dim
    Eigen::MatrixXd labels_w;  // m x h.label_dim

    int m() const { return static_cast<int>(A.rows()); }
    int n() const { return static_cast<int>(A.cols()); }
    void validate() const;
};

struct BipartiteState {
    int t = 0;
    Eigen::MatrixXd x;       // x^t, n x q
    Eigen::MatrixXd z;       // z^{t-1}, m x q (zero before the first step)
    Eigen::MatrixXd z_prev;  // z^{t-2}
};

BipartiteState bipartite_init(const BipartiteInstance& inst);

// z^t = A f(x^t, Y; t) - B_t h(z^{t-1}, W; t-1);
// x^{t+1} = A^T h(z^t, W; t) - D_t f(x^t, Y; t),
// where B_t, D_t are the realized A_ij^2-weighted Jacobian sums and
// h(z^{-1}; -1) = 0.
BipartiteState bipartite_step(const BipartiteInstance& inst,
                              const BipartiteState& state);

// State evolution pair: Sigma^t = E[h(Z^{t-1}, W) h^T] with
// Z^{t-1} ~ N(0, Xi^{t-1}), and Xi^t = (1/delta) E[f(X^t, Y) f^T] with
// X^t ~ N(0, Sigma^t). Polynomial f, h and Gaussian-mixture labels.
struct BipartiteSeModel {
    double delta = 0.0;
    int q = 1;
    int label_dim_y = 0;
    int label_dim_w = 0;
    std::vector<MultiPoly> f;  // q outputs over q + label_dim_y variables
    std::vector<MultiPoly> h;  // q outputs over q + label_dim_w variables
    GaussianMixture law_y;
    GaussianMixture law_w;

    void validate() const;
};

struct BipartiteSeState {
    int t = 0;
    Eigen::MatrixXd Sigma;  // q x q
    Eigen::MatrixXd Xi;     // q x q
};

BipartiteSeState se_bipartite_boundary(const BipartiteSeModel& model,
                                       const Eigen::MatrixXd& Xi0);
BipartiteSeState se_bipartite_step(const BipartiteSeModel& model,
                                   const BipartiteSeState& state);
std::vector<BipartiteSeState> se_bipartite_run(const BipartiteSeModel& model,
                                               const Eigen::MatrixXd& Xi0, int T);

// Two-time tables Sigma^{t,s}, Xi^{t,s} (2q x 2q), 1 <= s,t <= T for Sigma
// and 0 <= s,t <= T for Xi; diagonals match the single-time run.
struct BipartiteTwoTime {
    int T = 0;
    std::vector<std::vector<Eigen::MatrixXd>> Sigma;
    std::vector<std::vector<Eigen::MatrixXd>> Xi;
};

BipartiteTwoTime se_two_time_bipartite(const BipartiteSeModel& model,
                                       const Eigen::MatrixXd& Xi0, int T);

// Symmetric two-class embedding of the bipartite orbit: N = m + n with the
// z side as class 0 and the x side as class 1,
// A_s = [[0, A], [A^T, 0]] (kept at the bipartite 1/m scale), and component
// functions that alternate between h (class 0, odd steps) and f (class 1,
// even steps), zero otherwise. The embedded orbit satisfies
// x_s^{2t+1} restricted to class 0 = z^t and x_s^{2t} restricted to
// class 1 = x^t.
AmpInstance symmetric_embedding(const BipartiteInstance& inst);

}  // namespace ampu
