#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ampu/gaussian.hpp"
#include "ampu/poly.hpp"

namespace ampu {

// Converging-sequence description driving the matrix state evolution:
// k classes with fractions c and variance couplings W, per-class label law
// P_a (finite Gaussian mixture, possibly degenerate), and per-class
// polynomial component functions g over q + label_dim variables (iterate
// coordinates first, then label coordinates). g is time-independent here;
// all expectations are exact via Wick pairing.
struct SeModel {
    int k = 1;
    Eigen::MatrixXd W;
    Eigen::VectorXd c;
    int q = 1;
    int label_dim = 0;
    std::vector<GaussianMixture> labels;        // per class; empty when label_dim=0
    std::vector<std::vector<MultiPoly>> g;      // [class][output coordinate]

    void validate() const;
};

struct SeState {
    int t = 0;
    std::vector<Eigen::MatrixXd> Sigma;      // per class, q x q
    std::vector<Eigen::MatrixXd> Sigma_hat;  // per class, q x q
};

// State with only the boundary Sigma_hat^0 set (Sigma left empty at t=0).
SeState se_boundary(const SeModel& model,
                    const std::vector<Eigen::MatrixXd>& Sigma_hat0);

// Sigma^t_a = sum_b c_b W_ab Sigma_hat^{t-1}_b, then
// Sigma_hat^t_a = E[g(Z,Y,a) g^T] with Z ~ N(0, Sigma^t_a), Y ~ P_a.
// Eigenvalue drift in [-1e-10, 0) is repaired by symmetrize-and-clip;
// larger violations raise a domain error.
SeState se_step(const SeModel& model, const SeState& state);

// States at t = 0..T (index 0 is the boundary).
std::vector<SeState> se_run(const SeModel& model,
                            const std::vector<Eigen::MatrixXd>& Sigma_hat0,
                            int T);

// Two-time covariances: Sigma[t][s][a] is the 2q x 2q matrix Sigma^{t,s}_a
// for 1 <= s,t <= T, with the block boundary conditions
// Sigma_hat^{0,0} = [[S0,S0],[S0,S0]], Sigma_hat^{t,0} = diag(S^t, S0).
struct TwoTimeTable {
    int T = 0;
    int q = 1;
    std::vector<std::vector<std::vector<Eigen::MatrixXd>>> Sigma;
};

TwoTimeTable se_two_time_run(const SeModel& model,
                             const std::vector<Eigen::MatrixXd>& Sigma_hat0,
                             int T);

// CSV rows: t,class,row,col,sigma_value,sigma_hat_value
std::string se_trajectory_csv(const std::vector<SeState>& traj);

}  // namespace ampu
