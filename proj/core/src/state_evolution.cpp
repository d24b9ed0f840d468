#include "ampu/state_evolution.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ampu {

void SeModel::validate() const {
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (W.rows() != k || W.cols() != k)
        throw std::invalid_argument("W must be k x k");
    if (c.size() != k) throw std::invalid_argument("c must have length k");
    if (std::abs(c.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("class fractions must sum to 1");
    if (static_cast<int>(g.size()) != k)
        throw std::invalid_argument("g needs one family per class");
    for (const auto& cls : g) {
        if (static_cast<int>(cls.size()) != q)
            throw std::invalid_argument("g needs q outputs per class");
        for (const auto& p : cls) {
            if (p.nvars() != q + label_dim)
                throw std::invalid_argument("g variable count mismatch");
            if (p.degree() > 8)
                throw std::invalid_argument("g degree above cap 8");
        }
    }
    if (label_dim > 0) {
        if (static_cast<int>(labels.size()) != k)
            throw std::invalid_argument("labels need one mixture per class");
        for (const auto& mix : labels) {
            if (mix.dim != label_dim)
                throw std::invalid_argument("label mixture dimension mismatch");
            mix.validate();
        }
    }
}

namespace {

Eigen::MatrixXd psd_repair(Eigen::MatrixXd M) {
    M = 0.5 * (M + M.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    double lo = es.eigenvalues().minCoeff();
    if (lo >= 0.0) return M;
    if (lo < -1e-10)
        throw std::domain_error("state evolution matrix lost positive semidefiniteness");
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

GaussianMixture class_labels(const SeModel& model, int a) {
    if (model.label_dim == 0) return GaussianMixture::none();
    return model.labels[a];
}

// Sigma^{next}_a = sum_b c_b W_ab hat_b.
std::vector<Eigen::MatrixXd> couple(const SeModel& model,
                                    const std::vector<Eigen::MatrixXd>& hat) {
    std::vector<Eigen::MatrixXd> out(model.k);
    for (int a = 0; a < model.k; ++a) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(hat[0].rows(), hat[0].cols());
        for (int b = 0; b < model.k; ++b)
            S += model.c[b] * model.W(a, b) * hat[b];
        out[a] = psd_repair(std::move(S));
    }
    return out;
}

}  // namespace

SeState se_boundary(const SeModel& model,
                    const std::vector<Eigen::MatrixXd>& Sigma_hat0) {
    model.validate();
    if (static_cast<int>(Sigma_hat0.size()) != model.k)
        throw std::invalid_argument("boundary needs one matrix per class");
    SeState s;
    s.Sigma_hat.reserve(model.k);
    for (const auto& m : Sigma_hat0) {
        if (m.rows() != model.q || m.cols() != model.q)
            throw std::invalid_argument("boundary matrices must be q x q");
        s.Sigma_hat.push_back(psd_repair(m));
    }
    return s;
}

SeState se_step(const SeModel& model, const SeState& state) {
    model.validate();
    SeState next;
    next.t = state.t + 1;
    next.Sigma = couple(model, state.Sigma_hat);
    next.Sigma_hat.resize(model.k);
    for (int a = 0; a < model.k; ++a) {
        Eigen::MatrixXd hat(model.q, model.q);
        auto mix = class_labels(model, a);
        for (int r = 0; r < model.q; ++r)
            for (int s = r; s < model.q; ++s) {
                double v = gaussian_poly_moment(next.Sigma[a],
                                                model.g[a][r] * model.g[a][s], mix);
                hat(r, s) = v;
                hat(s, r) = v;
            }
        next.Sigma_hat[a] = psd_repair(std::move(hat));
    }
    return next;
}

std::vector<SeState> se_run(const SeModel& model,
                            const std::vector<Eigen::MatrixXd>& Sigma_hat0,
                            int T) {
    if (T < 0) throw std::invalid_argument("T must be nonnegative");
    std::vector<SeState> out;
    out.push_back(se_boundary(model, Sigma_hat0));
    for (int t = 0; t < T; ++t) out.push_back(se_step(model, out.back()));
    return out;
}

TwoTimeTable se_two_time_run(const SeModel& model,
                             const std::vector<Eigen::MatrixXd>& Sigma_hat0,
                             int T) {
    if (T < 1) throw std::invalid_argument("T must be at least 1");
    auto single = se_run(model, Sigma_hat0, T);
    const int q = model.q;
    const int k = model.k;

    // Embed g(Z^t) into the 2q + label_dim variable space twice: once
    // reading the first block, once the second.
    std::vector<std::vector<MultiPoly>> g_first(k), g_second(k);
    std::vector<int> map_first(q + model.label_dim), map_second(q + model.label_dim);
    for (int s = 0; s < q; ++s) {
        map_first[s] = s;
        map_second[s] = q + s;
    }
    for (int d = 0; d < model.label_dim; ++d) {
        map_first[q + d] = 2 * q + d;
        map_second[q + d] = 2 * q + d;
    }
    for (int a = 0; a < k; ++a)
        for (int r = 0; r < q; ++r) {
            g_first[a].push_back(
                model.g[a][r].embedded(2 * q + model.label_dim, map_first));
            g_second[a].push_back(
                model.g[a][r].embedded(2 * q + model.label_dim, map_second));
        }

    // hat[t][s][a]: 2q x 2q second-moment matrices.
    auto block2 = [&](const Eigen::MatrixXd& tl, const Eigen::MatrixXd& tr,
                      const Eigen::MatrixXd& bl, const Eigen::MatrixXd& br) {
        Eigen::MatrixXd M(2 * q, 2 * q);
        M.topLeftCorner(q, q) = tl;
        M.topRightCorner(q, q) = tr;
        M.bottomLeftCorner(q, q) = bl;
        M.bottomRightCorner(q, q) = br;
        return M;
    };
    std::vector<std::vector<std::vector<Eigen::MatrixXd>>> hat(
        T, std::vector<std::vector<Eigen::MatrixXd>>(T));
    TwoTimeTable table;
    table.T = T;
    table.q = q;
    table.Sigma.assign(T + 1, std::vector<std::vector<Eigen::MatrixXd>>(T + 1));

    auto hat_at = [&](int t, int s) -> std::vector<Eigen::MatrixXd> {
        std::vector<Eigen::MatrixXd> out(k);
        if (t == 0 && s == 0) {
            for (int a = 0; a < k; ++a) {
                const auto& h0 = single[0].Sigma_hat[a];
                out[a] = block2(h0, h0, h0, h0);
            }
        } else if (s == 0 || t == 0) {
            int u = std::max(t, s);
            for (int a = 0; a < k; ++a) {
                const auto& hu = single[u].Sigma_hat[a];
                const auto& h0 = single[0].Sigma_hat[a];
                Eigen::MatrixXd z = Eigen::MatrixXd::Zero(q, q);
                out[a] = t > 0 ? block2(hu, z, z, h0) : block2(h0, z, z, hu);
            }
        } else {
            out = hat[t - 1][s - 1];
        }
        return out;
    };

    for (int t = 1; t <= T; ++t) {
        for (int s = 1; s <= t; ++s) {
            auto prev_hat = hat_at(t - 1, s - 1);
            auto Sigma_ts = couple(model, prev_hat);
            table.Sigma[t][s] = Sigma_ts;
            if (s != t) {
                table.Sigma[s][t].resize(k);
                for (int a = 0; a < k; ++a) {
                    Eigen::MatrixXd M = Sigma_ts[a];
                    Eigen::MatrixXd sw(2 * q, 2 * q);
                    sw.topLeftCorner(q, q) = M.bottomRightCorner(q, q);
                    sw.bottomRightCorner(q, q) = M.topLeftCorner(q, q);
                    sw.topRightCorner(q, q) = M.bottomLeftCorner(q, q);
                    sw.bottomLeftCorner(q, q) = M.topRightCorner(q, q);
                    table.Sigma[s][t][a] = sw;
                }
            }
            if (t < T) {
                hat[t - 1][s - 1].resize(k);
                for (int a = 0; a < k; ++a) {
                    auto mix = class_labels(model, a);
                    Eigen::MatrixXd H(2 * q, 2 * q);
                    for (int r = 0; r < 2 * q; ++r) {
                        const MultiPoly& pr = r < q ? g_first[a][r] : g_second[a][r - q];
                        for (int ss = r; ss < 2 * q; ++ss) {
                            const MultiPoly& ps =
                                ss < q ? g_first[a][ss] : g_second[a][ss - q];
                            double v = gaussian_poly_moment(Sigma_ts[a], pr * ps, mix);
                            H(r, ss) = v;
                            H(ss, r) = v;
                        }
                    }
                    hat[t - 1][s - 1][a] = psd_repair(std::move(H));
                }
            }
        }
    }
    return table;
}

std::string se_trajectory_csv(const std::vector<SeState>& traj) {
    std::ostringstream os;
    os << "t,class,row,col,sigma_value,sigma_hat_value\n";
    os.precision(17);
    for (const auto& st : traj) {
        const int k = static_cast<int>(st.Sigma_hat.size());
        for (int a = 0; a < k; ++a) {
            const auto& hat = st.Sigma_hat[a];
            for (int r = 0; r < hat.rows(); ++r)
                for (int c = 0; c < hat.cols(); ++c) {
                    double sv = st.Sigma.empty() ? 0.0 : st.Sigma[a](r, c);
                    os << st.t << ',' << a << ',' << r << ',' << c << ',' << sv
                       << ',' << hat(r, c) << '\n';
                }
        }
    }
    return os.str();
}

}  // namespace ampu
