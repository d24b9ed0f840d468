#include "ampu/cs_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ampu/gaussian.hpp"
#include "ampu/phase_boundary.hpp"
#include "ampu/rng.hpp"

namespace ampu {

double soft_threshold(double u, double theta) {
    if (theta < 0.0) throw std::invalid_argument("threshold must be nonnegative");
    if (u > theta) return u - theta;
    if (u < -theta) return u + theta;
    return 0.0;
}

CsProblem CsProblem::make(const EnsembleSpec& ensemble, const SignalSpec& signal,
                          int n, double delta, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("delta must lie in (0,1)");
    int m = static_cast<int>(std::lround(delta * n));
    if (m < 1) throw std::invalid_argument("delta * n rounds to zero rows");
    CsProblem p;
    p.A = sample_rectangular(ensemble, m, n, mix64(seed ^ 0x9a7eULL));
    p.x0 = sample_signal(signal, n, mix64(seed ^ 0x51641ULL));
    p.y = p.A * p.x0;
    p.delta = static_cast<double>(m) / n;
    p.signal = signal;
    return p;
}

void CsProblem::validate() const {
    if (A.rows() != y.size() || A.cols() != x0.size())
        throw std::invalid_argument("problem dimensions inconsistent");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("delta must lie in (0,1)");
}

namespace {

// E[(eta(x + sigma Z; theta) - x)^2] for a fixed signal value x.
double atom_mse(double x, double sigma, double theta) {
    if (sigma == 0.0) {
        double e = soft_threshold(x, theta) - x;
        return e * e;
    }
    double a = (theta - x) / sigma;
    double b = (-theta - x) / sigma;
    double upper = (sigma * sigma + theta * theta) * normal_cdf(-a) +
                   sigma * sigma * a * normal_pdf(a) -
                   2.0 * sigma * theta * normal_pdf(a);
    double lower = (sigma * sigma + theta * theta) * normal_cdf(b) -
                   sigma * sigma * b * normal_pdf(b) -
                   2.0 * sigma * theta * normal_pdf(b);
    double middle = x * x * (normal_cdf(a) - normal_cdf(b));
    return upper + lower + middle;
}

// E[(eta(X + sigma Z; theta) - X)^2] for X standard normal, via the law of
// U = X + sigma Z and Stein's identity E[eta(U) X] = P{|U| >= theta}.
double gaussian_mse(double sigma, double theta) {
    double s2 = 1.0 + sigma * sigma;
    double s = std::sqrt(s2);
    double c = theta / s;
    double eta_sq = 2.0 * ((s2 + theta * theta) * normal_cdf(-c) -
                           s * theta * normal_pdf(c));
    return eta_sq - 4.0 * normal_cdf(-c) + 1.0;
}

double nonzero_mse(const SignalSpec& signal, double sigma, double theta) {
    if (signal.nonzero_law == NonzeroLaw::unit_gaussian)
        return gaussian_mse(sigma, theta);
    // plus_one and signed_unit: the atom formula is even in x.
    return atom_mse(1.0, sigma, theta);
}

double atom_tail(double x, double sigma, double theta) {
    if (sigma == 0.0) return std::abs(x) >= theta ? 1.0 : 0.0;
    double a = (theta - x) / sigma;
    double b = (-theta - x) / sigma;
    return normal_cdf(-a) + normal_cdf(b);
}

// E[eta(x + sigma Z; theta)] for a fixed x.
double atom_eta_mean(double x, double sigma, double theta) {
    if (sigma == 0.0) return soft_threshold(x, theta);
    double a = (theta - x) / sigma;
    double b = (-theta - x) / sigma;
    return (x - theta) * normal_cdf(-a) + sigma * normal_pdf(a) +
           (x + theta) * normal_cdf(b) - sigma * normal_pdf(b);
}

}  // namespace

double scalar_se_step(double sigma_sq, double alpha, double delta,
                      const SignalSpec& signal) {
    signal.validate();
    if (sigma_sq < 0.0) throw std::domain_error("sigma_sq must be nonnegative");
    if (alpha < 0.0) throw std::domain_error("alpha must be nonnegative");
    double sigma = std::sqrt(sigma_sq);
    double theta = alpha * sigma;
    double eps = signal.epsilon;
    double zero_part = atom_mse(0.0, sigma, theta);
    double nz_part = eps > 0.0 ? nonzero_mse(signal, sigma, theta) : 0.0;
    return ((1.0 - eps) * zero_part + eps * nz_part) / delta;
}

std::vector<double> scalar_se_trajectory(double alpha, double delta,
                                         const SignalSpec& signal, int T) {
    if (T < 0) throw std::invalid_argument("T must be nonnegative");
    std::vector<double> out(T + 1);
    out[0] = signal.second_moment() / delta;
    for (int t = 0; t < T; ++t)
        out[t + 1] = scalar_se_step(out[t], alpha, delta, signal);
    return out;
}

double threshold_tail_prob(double sigma, double theta, const SignalSpec& signal) {
    signal.validate();
    double eps = signal.epsilon;
    double zero_part = atom_tail(0.0, sigma, theta);
    double nz_part;
    if (eps == 0.0) {
        nz_part = 0.0;
    } else if (signal.nonzero_law == NonzeroLaw::unit_gaussian) {
        double s = std::sqrt(1.0 + sigma * sigma);
        nz_part = 2.0 * normal_cdf(-theta / s);
    } else {
        nz_part = atom_tail(1.0, sigma, theta);
    }
    return (1.0 - eps) * zero_part + eps * nz_part;
}

double eta_signal_cov(double sigma, double theta, const SignalSpec& signal) {
    signal.validate();
    double eps = signal.epsilon;
    if (eps == 0.0) return 0.0;
    if (signal.nonzero_law == NonzeroLaw::unit_gaussian) {
        double s = std::sqrt(1.0 + sigma * sigma);
        return eps * 2.0 * normal_cdf(-theta / s);
    }
    // Both atom laws reduce to x = 1 by symmetry; E[eta X] = x E[eta].
    return eps * atom_eta_mean(1.0, sigma, theta);
}

namespace {

// Gauss-Legendre rule on [0, 1] by Golub-Welsch.
const std::pair<Eigen::VectorXd, Eigen::VectorXd>& gauss_legendre_01() {
    static std::pair<Eigen::VectorXd, Eigen::VectorXd> rule = [] {
        const int n = 16;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int j = 1; j < n; ++j)
            J(j, j - 1) = J(j - 1, j) = j / std::sqrt(4.0 * j * j - 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        Eigen::VectorXd x = (es.eigenvalues().array() + 1.0) / 2.0;
        Eigen::VectorXd w =
            es.eigenvectors().row(0).transpose().array().square();
        return std::make_pair(x, w);
    }();
    return rule;
}

// integral of g(u) phi(u / sd) / sd du over the real line, splitting panels
// at the soft-threshold kink locations so each piece is analytic.
double integrate_kinked(double sd, double k1, double k2,
                        const std::function<double(double)>& g) {
    if (sd <= 0.0) return g(0.0);
    const auto& [xs, ws] = gauss_legendre_01();
    double lo = -9.0 * sd, hi = 9.0 * sd;
    std::vector<double> cuts = {lo};
    for (double k : {std::min(k1, k2), std::max(k1, k2)})
        if (k > lo && k < hi) cuts.push_back(k);
    cuts.push_back(hi);
    double total = 0.0;
    for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        double a = cuts[seg], b = cuts[seg + 1];
        int panels = std::max(1, int(std::ceil((b - a) / (1.5 * sd))));
        double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            double pa = a + p * h;
            for (int i = 0; i < xs.size(); ++i) {
                double u = pa + h * xs[i];
                total += ws[i] * h * g(u) * normal_pdf(u / sd) / sd;
            }
        }
    }
    return total;
}

// E[(eta(X+Z_s;th_s)-X)(eta(X+Z_t;th_t)-X)] with Cov(Z_s,Z_t) given by
// (Rss, Rst, Rtt). The inner conditional expectation of the time-t factor
// is closed form (atom_eta_mean), leaving a single kinked 1-D integral;
// the Gaussian nonzero law reduces to the joint law of U = X + Z plus
// Stein terms.
double cross_error_moment(double Rss, double Rst, double Rtt, double th_s,
                          double th_t, const SignalSpec& signal, int /*nodes*/) {
    double eps = signal.epsilon;
    // The off-diagonal entry carries quadrature error from earlier steps;
    // clamp it to the Cauchy-Schwarz bound so the joint law stays valid as
    // the iterates become perfectly correlated.
    double cap = std::sqrt(Rss * Rtt);
    Rst = std::clamp(Rst, -cap, cap);

    auto atom_term = [&](double x) {
        if (Rss <= 0.0) {
            double es = soft_threshold(x, th_s) - x;
            double et = atom_eta_mean(x, std::sqrt(std::max(Rtt, 0.0)), th_t) - x;
            return es * et;
        }
        double slope = Rst / Rss;
        double cond_var = std::max(Rtt - Rst * Rst / Rss, 0.0);
        double cond_sd = std::sqrt(cond_var);
        double sd = std::sqrt(Rss);
        return integrate_kinked(sd, th_s - x, -th_s - x, [&](double zs) {
            double es = soft_threshold(x + zs, th_s) - x;
            double et = atom_eta_mean(x + slope * zs, cond_sd, th_t) - x;
            return es * et;
        });
    };

    double zero_part = atom_term(0.0);
    double nz_part = 0.0;
    if (eps > 0.0) {
        if (signal.nonzero_law == NonzeroLaw::unit_gaussian) {
            double vs = 1.0 + Rss, vt = 1.0 + Rtt, vst = 1.0 + Rst;
            double ss = std::sqrt(vs), st = std::sqrt(vt);
            double slope = vst / vs;
            double cond_sd = std::sqrt(std::max(vt - vst * vst / vs, 0.0));
            double ee = integrate_kinked(ss, th_s, -th_s, [&](double us) {
                return soft_threshold(us, th_s) *
                       atom_eta_mean(slope * us, cond_sd, th_t);
            });
            nz_part = ee - 2.0 * normal_cdf(-th_s / ss) -
                      2.0 * normal_cdf(-th_t / st) + 1.0;
        } else {
            nz_part = atom_term(1.0);
        }
    }
    return (1.0 - eps) * zero_part + eps * nz_part;
}

}  // namespace

Eigen::MatrixXd two_time_table(double alpha, double delta,
                               const SignalSpec& signal, int T) {
    if (T < 0 || T > 200) throw std::invalid_argument("T must lie in [0,200]");
    signal.validate();
    const int nodes = 81;
    auto sig = scalar_se_trajectory(alpha, delta, signal, T);
    Eigen::MatrixXd R(T + 1, T + 1);
    double ex2 = signal.second_moment();
    R(0, 0) = ex2 / delta;
    for (int t = 1; t <= T; ++t) {
        double sprev = std::sqrt(sig[t - 1]);
        double theta = alpha * sprev;
        double v = (ex2 - eta_signal_cov(sprev, theta, signal)) / delta;
        R(0, t) = v;
        R(t, 0) = v;
    }
    for (int t = 1; t <= T; ++t) {
        // Diagonal entries come from the closed-form recursion; the 2D
        // quadrature degenerates to the same value at s = t.
        R(t, t) = sig[t];
        for (int s = 1; s < t; ++s) {
            double th_s = alpha * std::sqrt(sig[s - 1]);
            double th_t = alpha * std::sqrt(sig[t - 1]);
            double v = cross_error_moment(sig[s - 1], R(s - 1, t - 1), sig[t - 1],
                                          th_s, th_t, signal, nodes) /
                       delta;
            R(s, t) = v;
            R(t, s) = v;
        }
    }
    return R;
}

CsAmpState cs_amp_init(const CsProblem& problem) {
    problem.validate();
    CsAmpState s;
    s.x = Eigen::VectorXd::Zero(problem.A.cols());
    s.z = Eigen::VectorXd::Zero(problem.A.rows());
    s.sigma_sq = problem.signal.second_moment() / problem.delta;
    return s;
}

void cs_amp_step(const CsProblem& problem, CsAmpState& state, double alpha,
                 SigmaMode sigma_mode, OnsagerMode onsager_mode,
                 const std::vector<double>* se_sigma_sq) {
    const auto m = problem.A.rows();
    if (state.x.size() != problem.A.cols() || state.z.size() != m)
        throw std::invalid_argument("state dimensions do not match problem");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");

    Eigen::VectorXd z_new;
    if (state.t == 0) {
        state.b = 0.0;  // z^{-1} = 0, so the memory term drops out
        z_new = problem.y - problem.A * state.x;
    } else if (onsager_mode == OnsagerMode::averaged) {
        state.b = static_cast<double>(state.nnz) / m;
        z_new = problem.y - problem.A * state.x + state.b * state.z;
    } else {
        // Row-wise realized A_ij^2 weights against the active set.
        Eigen::VectorXd active(state.x.size());
        for (Eigen::Index i = 0; i < state.x.size(); ++i)
            active[i] = state.x[i] != 0.0 ? 1.0 : 0.0;
        Eigen::VectorXd brow = problem.A.array().square().matrix() * active;
        state.b = brow.mean();
        z_new = problem.y - problem.A * state.x +
                (brow.array() * state.z.array()).matrix();
    }

    double sigma_sq;
    if (sigma_mode == SigmaMode::empirical) {
        sigma_sq = z_new.squaredNorm() / m;
    } else {
        if (!se_sigma_sq || state.t >= static_cast<int>(se_sigma_sq->size()))
            throw std::invalid_argument("SE-tracked mode needs a sigma trajectory");
        sigma_sq = (*se_sigma_sq)[state.t];
    }
    double theta = alpha * std::sqrt(sigma_sq);

    Eigen::VectorXd u = state.x + problem.A.transpose() * z_new;
    int nnz = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        u[i] = soft_threshold(u[i], theta);
        if (u[i] != 0.0) ++nnz;
    }
    if (!u.allFinite() || !z_new.allFinite())
        throw std::runtime_error("iterate diverged at t=" + std::to_string(state.t));

    state.x = std::move(u);
    state.z = std::move(z_new);
    state.sigma_sq = sigma_sq;
    state.nnz = nnz;
    state.t += 1;
}

SolveResult solve_l1(const CsProblem& problem, const SolveParams& params) {
    problem.validate();
    if (params.max_iter < 0 || params.tol <= 0.0)
        throw std::invalid_argument("invalid solver parameters");
    double alpha = params.alpha;
    if (alpha < 0.0) alpha = alpha_star(problem.signal.epsilon);

    std::vector<double> se;
    if (params.sigma_mode == SigmaMode::se_tracked)
        se = scalar_se_trajectory(alpha, problem.delta, problem.signal,
                                  params.max_iter);

    double x0_norm = std::max(problem.x0.norm(), 1.0);
    SolveResult res;
    CsAmpState state = cs_amp_init(problem);
    double rel = (state.x - problem.x0).norm() / x0_norm;
    res.residual_history.push_back(rel);
    int stalled = 0;
    for (int it = 0; it < params.max_iter; ++it) {
        if (rel <= params.tol) break;
        Eigen::VectorXd x_prev = state.x;
        try {
            cs_amp_step(problem, state, alpha, params.sigma_mode,
                        params.onsager_mode, se.empty() ? nullptr : &se);
        } catch (const std::runtime_error&) {
            res.diverged = true;
            break;
        }
        rel = (state.x - problem.x0).norm() / x0_norm;
        res.residual_history.push_back(rel);
        double move = (state.x - x_prev).norm() / std::max(x_prev.norm(), 1.0);
        stalled = move < 1e-8 ? stalled + 1 : 0;
        if (stalled >= 5) break;  // fixed point reached, no further progress
    }
    res.x_hat = state.x;
    res.iterations = state.t;
    res.success = !res.diverged && rel <= params.tol;
    return res;
}

}  // namespace ampu
