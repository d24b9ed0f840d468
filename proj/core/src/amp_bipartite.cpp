#include "ampu/amp_bipartite.hpp"

#include <cmath>
#include <stdexcept>

namespace ampu {

void BipartiteInstance::validate() const {
    if (m() < 1 || n() < 1) throw std::invalid_argument("empty matrix");
    if (std::abs(static_cast<double>(m()) / n() - delta) > 1.0 / n())
        throw std::invalid_argument("delta inconsistent with m/n");
    if (x0.rows() != n() || x0.cols() != q)
        throw std::invalid_argument("x0 must be n x q");
    if (!f.f || !f.jac || !h.f || !h.jac)
        throw std::invalid_argument("component functions missing");
    if (f.label_dim > 0 && (labels_y.rows() != n() || labels_y.cols() != f.label_dim))
        throw std::invalid_argument("labels_y must be n x label_dim");
    if (h.label_dim > 0 && (labels_w.rows() != m() || labels_w.cols() != h.label_dim))
        throw std::invalid_argument("labels_w must be m x label_dim");
}

BipartiteState bipartite_init(const BipartiteInstance& inst) {
    inst.validate();
    BipartiteState s;
    s.x = inst.x0;
    s.z = Eigen::MatrixXd::Zero(inst.m(), inst.q);
    s.z_prev = Eigen::MatrixXd::Zero(inst.m(), inst.q);
    return s;
}

namespace {

Eigen::VectorXd row_label(const Eigen::MatrixXd& labels, int dim, int i) {
    if (dim == 0) return Eigen::VectorXd();
    return labels.row(i).transpose();
}

}  // namespace

BipartiteState bipartite_step(const BipartiteInstance& inst,
                              const BipartiteState& state) {
    const int m = inst.m(), n = inst.n(), q = inst.q;
    if (state.x.rows() != n || state.z.rows() != m)
        throw std::invalid_argument("state shape does not match instance");
    const int t = state.t;

    Eigen::MatrixXd fx(n, q);
    std::vector<Eigen::MatrixXd> jf(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xi = state.x.row(i).transpose();
        Eigen::VectorXd yi = row_label(inst.labels_y, inst.f.label_dim, i);
        fx.row(i) = inst.f.f(xi, yi, 0, t).transpose();
        jf[i] = inst.f.jac(xi, yi, 0, t);
    }

    Eigen::ArrayXXd A2 = inst.A.array().square();

    // z^t = A f(x^t; t) - B_t h(z^{t-1}; t-1)
    Eigen::MatrixXd z_new = inst.A * fx;
    if (t > 0) {
        for (int j = 0; j < m; ++j) {
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(q, q);
            for (int i = 0; i < n; ++i) B += A2(j, i) * jf[i];
            Eigen::VectorXd zj = state.z.row(j).transpose();
            Eigen::VectorXd wj = row_label(inst.labels_w, inst.h.label_dim, j);
            z_new.row(j) -= (B * inst.h.f(zj, wj, 0, t - 1)).transpose();
        }
    }
    if (!z_new.allFinite()) throw DivergenceError(t);

    Eigen::MatrixXd hz(m, q);
    std::vector<Eigen::MatrixXd> jh(m);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd zj = z_new.row(j).transpose();
        Eigen::VectorXd wj = row_label(inst.labels_w, inst.h.label_dim, j);
        hz.row(j) = inst.h.f(zj, wj, 0, t).transpose();
        jh[j] = inst.h.jac(zj, wj, 0, t);
    }

    // x^{t+1} = A^T h(z^t; t) - D_t f(x^t; t)
    Eigen::MatrixXd x_new = inst.A.transpose() * hz;
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(q, q);
        for (int j = 0; j < m; ++j) D += A2(j, i) * jh[j];
        x_new.row(i) -= (D * fx.row(i).transpose()).transpose();
    }
    if (!x_new.allFinite()) throw DivergenceError(t);

    BipartiteState next;
    next.t = t + 1;
    next.x = std::move(x_new);
    next.z_prev = state.z;
    next.z = std::move(z_new);
    return next;
}

void BipartiteSeModel::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (static_cast<int>(f.size()) != q || static_cast<int>(h.size()) != q)
        throw std::invalid_argument("f and h need q outputs");
    for (const auto& p : f)
        if (p.nvars() != q + label_dim_y)
            throw std::invalid_argument("f variable count mismatch");
    for (const auto& p : h)
        if (p.nvars() != q + label_dim_w)
            throw std::invalid_argument("h variable count mismatch");
    if (label_dim_y > 0 && law_y.dim != label_dim_y)
        throw std::invalid_argument("Y law dimension mismatch");
    if (label_dim_w > 0 && law_w.dim != label_dim_w)
        throw std::invalid_argument("W law dimension mismatch");
}

namespace {

Eigen::MatrixXd second_moment(const std::vector<MultiPoly>& g,
                              const Eigen::MatrixXd& Sigma,
                              const GaussianMixture& mix) {
    const int q = static_cast<int>(g.size());
    Eigen::MatrixXd M(q, q);
    for (int r = 0; r < q; ++r)
        for (int s = r; s < q; ++s) {
            double v = gaussian_poly_moment(Sigma, g[r] * g[s], mix);
            M(r, s) = v;
            M(s, r) = v;
        }
    return M;
}

GaussianMixture mix_or_none(const GaussianMixture& m, int dim) {
    return dim == 0 ? GaussianMixture::none() : m;
}

}  // namespace

BipartiteSeState se_bipartite_boundary(const BipartiteSeModel& model,
                                       const Eigen::MatrixXd& Xi0) {
    model.validate();
    if (Xi0.rows() != model.q || Xi0.cols() != model.q)
        throw std::invalid_argument("Xi0 must be q x q");
    BipartiteSeState s;
    s.Sigma = Eigen::MatrixXd::Zero(model.q, model.q);
    s.Xi = Xi0;
    return s;
}

BipartiteSeState se_bipartite_step(const BipartiteSeModel& model,
                                   const BipartiteSeState& state) {
    model.validate();
    BipartiteSeState next;
    next.t = state.t + 1;
    next.Sigma = second_moment(model.h, state.Xi,
                               mix_or_none(model.law_w, model.label_dim_w));
    next.Xi = second_moment(model.f, next.Sigma,
                            mix_or_none(model.law_y, model.label_dim_y)) /
              model.delta;
    return next;
}

std::vector<BipartiteSeState> se_bipartite_run(const BipartiteSeModel& model,
                                               const Eigen::MatrixXd& Xi0,
                                               int T) {
    if (T < 0) throw std::invalid_argument("T must be nonnegative");
    std::vector<BipartiteSeState> out;
    out.push_back(se_bipartite_boundary(model, Xi0));
    for (int t = 0; t < T; ++t) out.push_back(se_bipartite_step(model, out.back()));
    return out;
}

BipartiteTwoTime se_two_time_bipartite(const BipartiteSeModel& model,
                                       const Eigen::MatrixXd& Xi0, int T) {
    if (T < 1) throw std::invalid_argument("T must be at least 1");
    auto single = se_bipartite_run(model, Xi0, T);
    const int q = model.q;

    auto embed_pair = [&](const std::vector<MultiPoly>& g, int label_dim) {
        std::vector<MultiPoly> first, second;
        std::vector<int> mf(q + label_dim), ms(q + label_dim);
        for (int s = 0; s < q; ++s) {
            mf[s] = s;
            ms[s] = q + s;
        }
        for (int d = 0; d < label_dim; ++d) mf[q + d] = ms[q + d] = 2 * q + d;
        for (const auto& p : g) {
            first.push_back(p.embedded(2 * q + label_dim, mf));
            second.push_back(p.embedded(2 * q + label_dim, ms));
        }
        return std::make_pair(first, second);
    };
    auto [h1, h2] = embed_pair(model.h, model.label_dim_w);
    auto [f1, f2] = embed_pair(model.f, model.label_dim_y);

    auto pair_moment = [&](const std::vector<MultiPoly>& a,
                           const std::vector<MultiPoly>& b,
                           const Eigen::MatrixXd& Sigma,
                           const GaussianMixture& mix) {
        Eigen::MatrixXd M(2 * q, 2 * q);
        for (int r = 0; r < 2 * q; ++r) {
            const MultiPoly& pr = r < q ? a[r] : b[r - q];
            for (int s = r; s < 2 * q; ++s) {
                const MultiPoly& ps = s < q ? a[s] : b[s - q];
                double v = gaussian_poly_moment(Sigma, pr * ps, mix);
                M(r, s) = v;
                M(s, r) = v;
            }
        }
        return M;
    };
    auto block2 = [&](const Eigen::MatrixXd& tl, const Eigen::MatrixXd& br,
                      bool filled) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * q, 2 * q);
        M.topLeftCorner(q, q) = tl;
        M.bottomRightCorner(q, q) = br;
        if (filled) {
            M.topRightCorner(q, q) = tl;
            M.bottomLeftCorner(q, q) = tl;
        }
        return M;
    };

    BipartiteTwoTime out;
    out.T = T;
    out.Sigma.assign(T + 1, std::vector<Eigen::MatrixXd>(T + 1));
    out.Xi.assign(T + 1, std::vector<Eigen::MatrixXd>(T + 1));
    out.Xi[0][0] = block2(single[0].Xi, single[0].Xi, true);
    for (int t = 1; t <= T; ++t) {
        out.Xi[t][0] = block2(single[t].Xi, single[0].Xi, false);
        out.Xi[0][t] = block2(single[0].Xi, single[t].Xi, false);
    }
    auto mix_w = mix_or_none(model.law_w, model.label_dim_w);
    auto mix_y = mix_or_none(model.law_y, model.label_dim_y);
    for (int t = 1; t <= T; ++t)
        for (int s = 1; s <= T; ++s) {
            out.Sigma[t][s] = pair_moment(h1, h2, out.Xi[t - 1][s - 1], mix_w);
            out.Xi[t][s] = pair_moment(f1, f2, out.Sigma[t][s], mix_y) / model.delta;
        }
    return out;
}

AmpInstance symmetric_embedding(const BipartiteInstance& inst) {
    inst.validate();
    const int m = inst.m(), n = inst.n(), q = inst.q;
    const int N = m + n;
    AmpInstance sym;
    sym.q = q;
    sym.A = Eigen::MatrixXd::Zero(N, N);
    sym.A.topRightCorner(m, n) = inst.A;
    sym.A.bottomLeftCorner(n, m) = inst.A.transpose();

    sym.partition.assign(N, 0);
    for (int i = m; i < N; ++i) sym.partition[i] = 1;

    const int ld = std::max(inst.f.label_dim, inst.h.label_dim);
    sym.labels = Eigen::MatrixXd::Zero(N, ld);
    if (inst.h.label_dim > 0)
        sym.labels.topLeftCorner(m, inst.h.label_dim) = inst.labels_w;
    if (inst.f.label_dim > 0)
        sym.labels.bottomLeftCorner(n, inst.f.label_dim) = inst.labels_y;

    sym.x0 = Eigen::MatrixXd::Zero(N, q);
    sym.x0.bottomRows(n) = inst.x0;

    // Class 0 (z side) applies h at odd times 2t+1 with bipartite time t;
    // class 1 (x side) applies f at even times 2t; the off-phase maps are
    // identically zero, which keeps the unused half of the orbit at zero.
    ComponentFamily f_fam = inst.f, h_fam = inst.h;
    int f_ld = inst.f.label_dim, h_ld = inst.h.label_dim;
    ComponentFamily fam;
    fam.q = q;
    fam.label_dim = ld;
    fam.f = [f_fam, h_fam, f_ld, h_ld, q](const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y, int cls,
                                          int t) -> Eigen::VectorXd {
        bool odd = (t % 2) != 0;
        if (cls == 0 && odd) return h_fam.f(x, y.head(h_ld), 0, (t - 1) / 2);
        if (cls == 1 && !odd) return f_fam.f(x, y.head(f_ld), 0, t / 2);
        return Eigen::VectorXd::Zero(q);
    };
    fam.jac = [f_fam, h_fam, f_ld, h_ld, q](const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y, int cls,
                                            int t) -> Eigen::MatrixXd {
        bool odd = (t % 2) != 0;
        if (cls == 0 && odd) return h_fam.jac(x, y.head(h_ld), 0, (t - 1) / 2);
        if (cls == 1 && !odd) return f_fam.jac(x, y.head(f_ld), 0, t / 2);
        return Eigen::MatrixXd::Zero(q, q);
    };
    sym.fam = std::move(fam);

    // E A_ij^2 = 1/m across the bipartite edges gives W_12 = N/m.
    auto profile = std::make_shared<VarianceProfile>();
    profile->k = 2;
    profile->W = Eigen::MatrixXd::Zero(2, 2);
    profile->W(0, 1) = profile->W(1, 0) = static_cast<double>(N) / m;
    profile->fractions = Eigen::VectorXd(2);
    profile->fractions << static_cast<double>(m) / N, static_cast<double>(n) / N;
    sym.profile = std::move(profile);
    return sym;
}

}  // namespace ampu
