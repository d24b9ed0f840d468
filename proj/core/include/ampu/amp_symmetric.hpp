#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ampu/ensembles.hpp"
#include "ampu/poly.hpp"

namespace ampu {

// Thrown when an iterate picks up a non-finite entry; carries the iteration
// index and, when raised from run_orbit, the summaries collected so far.
struct DivergenceError : std::runtime_error {
    int t;
    std::vector<std::vector<double>> partial;
    explicit DivergenceError(int t_)
        : std::runtime_error("iterate diverged at t=" + std::to_string(t_)),
          t(t_) {}
};

// Family of component functions f(x, y, class, t) -> R^q with Jacobian
// df/dx. A polynomial-coefficient form (per class, per output coordinate,
// over q + label_dim variables: x first, then y) is optional and required
// only by the tree oracle.
struct ComponentFamily {
    int q = 1;
    int label_dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, int cls, int t)>
        f;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, int cls, int t)>
        jac;
    std::vector<std::vector<MultiPoly>> polys;  // [class][output coordinate]

    bool has_polys() const { return !polys.empty(); }

    // Builds f and jac by evaluating the polynomials; `polys[a][r]` is the
    // r-th output for class a, constant in t.
    static ComponentFamily from_polys(int q, int label_dim,
                                      std::vector<std::vector<MultiPoly>> polys);
    static ComponentFamily identity(int q = 1);
};

struct AmpInstance {
    Eigen::MatrixXd A;  // symmetric, zero diagonal
    int q = 1;
    ComponentFamily fam;
    Eigen::MatrixXd x0;          // N x q
    std::vector<int> partition;  // class index per coordinate
    Eigen::MatrixXd labels;      // N x label_dim
    std::shared_ptr<VarianceProfile> profile;  // needed for averaged Onsager

    int N() const { return static_cast<int>(A.rows()); }
    void validate() const;  // symmetry, zero diagonal, Jacobian FD check
};

struct OrbitState {
    int t = 0;
    Eigen::MatrixXd x_curr;  // x^t
    Eigen::MatrixXd x_prev;  // x^{t-1}; unused content at t = 0
};

enum class SymOnsager { realized, averaged };

OrbitState amp_init(const AmpInstance& inst);

// x^{t+1}_i = sum_j A_ij f^j(x^t_j, t)
//           - [sum_j A_ij^2 (df^j/dx)(x^t_j, t)] f^i(x^{t-1}_i, t-1),
// with f(x^{-1}; -1) = 0 at t = 0. The averaged mode replaces A_ij^2 by
// W_ab/N from the instance's variance profile.
OrbitState amp_step(const AmpInstance& inst, const OrbitState& state,
                    SymOnsager onsager = SymOnsager::realized);

// Dense directed-message iteration used as an oracle; intended for N <= 500.
struct MessageState {
    int t = 0;
    Eigen::MatrixXd msgs;    // (N*N) x q; row i*N+j holds z_{i->j}
    Eigen::MatrixXd z_node;  // N x q
};

MessageState mp_init(const AmpInstance& inst);

// z^{t+1}_{i->j} = sum_{l != j} A_{li} f^l(z^t_{l->i}, t); node values sum
// over all l.
MessageState mp_step(const AmpInstance& inst, const MessageState& state);

// Same update with an independently drawn matrix replacing inst.A for this
// step only.
MessageState mp_iid_step(const AmpInstance& inst, const MessageState& state,
                         const Eigen::MatrixXd& fresh_A);

using OrbitObserver =
    std::function<double(const AmpInstance&, const OrbitState&)>;

// Runs T AMP steps; summaries[t-1][k] is observer k evaluated after step t.
// On divergence rethrows DivergenceError with the partial summaries attached.
std::vector<std::vector<double>> run_orbit(const AmpInstance& inst, int T,
                                           const std::vector<OrbitObserver>& observers,
                                           SymOnsager onsager = SymOnsager::realized);

}  // namespace ampu
