#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ampu/ensembles.hpp"

namespace ampu {

// Soft threshold eta(u; theta) = sign(u) (|u| - theta)_+, the proximal map
// of the l1 norm. theta must be nonnegative.
double soft_threshold(double u, double theta);

// Sparse recovery problem y = A x0 with an m x n matrix of variance 1/m
// entries. delta = m/n is the measurement rate.
struct CsProblem {
    Eigen::MatrixXd A;
    Eigen::VectorXd x0;
    Eigen::VectorXd y;
    double delta = 0.0;
    SignalSpec signal;

    static CsProblem make(const EnsembleSpec& ensemble, const SignalSpec& signal,
                          int n, double delta, std::uint64_t seed);
    void validate() const;
};

enum class SigmaMode { se_tracked, empirical };
enum class OnsagerMode { averaged, per_row };

struct CsAmpState {
    int t = 0;
    Eigen::VectorXd x;       // x^t
    Eigen::VectorXd z;       // z^{t-1} (zero before the first step)
    double sigma_sq = 0.0;   // threshold scale used at the last step
    double b = 0.0;          // Onsager coefficient used at the last step
    int nnz = 0;             // nonzeros of x^t
};

CsAmpState cs_amp_init(const CsProblem& problem);

// One iteration: z^t = y - A x^t + b_t z^{t-1}, then
// x^{t+1} = eta(x^t + A^T z^t; alpha sigma_t). The averaged Onsager
// coefficient is b_t = nnz(x^t)/m; the per-row mode weights the previous
// residual row-wise by realized A_ij^2 sums.
void cs_amp_step(const CsProblem& problem, CsAmpState& state, double alpha,
                 SigmaMode sigma_mode = SigmaMode::se_tracked,
                 OnsagerMode onsager_mode = OnsagerMode::averaged,
                 const std::vector<double>* se_sigma_sq = nullptr);

// Scalar state evolution map F: next sigma^2 given current sigma^2, with
// threshold theta = alpha sigma. Closed form in Phi/phi for the
// zero-inflated signal laws of SignalSpec.
double scalar_se_step(double sigma_sq, double alpha, double delta,
                      const SignalSpec& signal);

// sigma_t^2 for t = 0..T, boundary sigma_0^2 = E{X^2}/delta.
std::vector<double> scalar_se_trajectory(double alpha, double delta,
                                         const SignalSpec& signal, int T);

// P{|X + sigma Z| >= theta}, the large-n limit of the fraction of active
// coordinates (and of delta * b_t).
double threshold_tail_prob(double sigma, double theta, const SignalSpec& signal);

// E{eta(X + sigma Z; theta) X}.
double eta_signal_cov(double sigma, double theta, const SignalSpec& signal);

// Two-time covariance table R_{s,t}, 0 <= s,t <= T, with
// R_{s+1,t+1} = (1/delta) E{[eta(X+Z_s;theta_s)-X][eta(X+Z_t;theta_t)-X]},
// Cov(Z_s,Z_t) = R_{s,t}. Diagonal equals the scalar SE trajectory.
Eigen::MatrixXd two_time_table(double alpha, double delta,
                               const SignalSpec& signal, int T);

struct SolveParams {
    double alpha = -1.0;  // < 0 means: use the minimax threshold alpha*(eps)
    int max_iter = 300;
    double tol = 1e-3;
    // The solver defaults to the empirical threshold scale: precomputed SE
    // scales detach from the realized residual at moderate n and make the
    // iteration diverge once theta_t drops below the finite-size noise floor.
    SigmaMode sigma_mode = SigmaMode::empirical;
    OnsagerMode onsager_mode = OnsagerMode::averaged;
};

struct SolveResult {
    Eigen::VectorXd x_hat;
    int iterations = 0;
    bool success = false;
    bool diverged = false;
    std::vector<double> residual_history;  // relative l2 error per iteration
};

SolveResult solve_l1(const CsProblem& problem, const SolveParams& params);

}  // namespace ampu
