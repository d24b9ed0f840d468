#include "ampu/amp_symmetric.hpp"

#include <cmath>

#include "ampu/rng.hpp"

namespace ampu {

ComponentFamily ComponentFamily::from_polys(
    int q, int label_dim, std::vector<std::vector<MultiPoly>> polys) {
    if (polys.empty()) throw std::invalid_argument("empty polynomial family");
    for (const auto& cls : polys) {
        if (static_cast<int>(cls.size()) != q)
            throw std::invalid_argument("polynomial family needs q outputs per class");
        for (const auto& p : cls)
            if (p.nvars() != q + label_dim)
                throw std::invalid_argument("polynomial variable count mismatch");
    }
    auto dpolys = std::make_shared<std::vector<std::vector<std::vector<MultiPoly>>>>();
    for (const auto& cls : polys) {
        std::vector<std::vector<MultiPoly>> dc;
        for (const auto& p : cls) {
            std::vector<MultiPoly> ds;
            for (int s = 0; s < q; ++s) ds.push_back(p.derivative(s));
            dc.push_back(std::move(ds));
        }
        dpolys->push_back(std::move(dc));
    }
    auto ps = std::make_shared<std::vector<std::vector<MultiPoly>>>(polys);
    ComponentFamily fam;
    fam.q = q;
    fam.label_dim = label_dim;
    fam.polys = std::move(polys);
    fam.f = [ps, q, label_dim](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               int cls, int) {
        Eigen::VectorXd v(q + label_dim);
        v.head(q) = x;
        if (label_dim > 0) v.tail(label_dim) = y;
        Eigen::VectorXd out(q);
        for (int r = 0; r < q; ++r) out[r] = (*ps)[cls][r].eval(v);
        return out;
    };
    fam.jac = [dpolys, q, label_dim](const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y, int cls, int) {
        Eigen::VectorXd v(q + label_dim);
        v.head(q) = x;
        if (label_dim > 0) v.tail(label_dim) = y;
        Eigen::MatrixXd J(q, q);
        for (int r = 0; r < q; ++r)
            for (int s = 0; s < q; ++s) J(r, s) = (*dpolys)[cls][r][s].eval(v);
        return J;
    };
    return fam;
}

ComponentFamily ComponentFamily::identity(int q) {
    ComponentFamily fam;
    fam.q = q;
    fam.f = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, int, int) {
        return x;
    };
    fam.jac = [q](const Eigen::VectorXd&, const Eigen::VectorXd&, int, int) {
        return Eigen::MatrixXd::Identity(q, q).eval();
    };
    return fam;
}

void AmpInstance::validate() const {
    const int n = N();
    if (A.cols() != n) throw std::invalid_argument("A must be square");
    if (!A.isApprox(A.transpose(), 1e-12))
        throw std::invalid_argument("A must be symmetric");
    if (A.diagonal().cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("A must have zero diagonal");
    if (x0.rows() != n || x0.cols() != q)
        throw std::invalid_argument("x0 must be N x q");
    if (static_cast<int>(partition.size()) != n)
        throw std::invalid_argument("partition must have one class per coordinate");
    if (fam.label_dim > 0 &&
        (labels.rows() != n || labels.cols() != fam.label_dim))
        throw std::invalid_argument("labels must be N x label_dim");
    if (!fam.f || !fam.jac)
        throw std::invalid_argument("component functions missing");

    // Central-difference Jacobian check at a few random points.
    auto rng = make_stream(0xfdc4ULL);
    std::normal_distribution<double> g;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(std::max(fam.label_dim, 1));
    if (fam.label_dim > 0 && n > 0) y = labels.row(0).transpose();
    for (int rep = 0; rep < 4; ++rep) {
        Eigen::VectorXd x(q);
        for (int s = 0; s < q; ++s) x[s] = g(rng);
        int cls = partition.empty() ? 0 : partition[0];
        Eigen::MatrixXd J = fam.jac(x, y, cls, 0);
        const double h = 1e-5;
        for (int s = 0; s < q; ++s) {
            Eigen::VectorXd xp = x, xm = x;
            xp[s] += h;
            xm[s] -= h;
            Eigen::VectorXd fd = (fam.f(xp, y, cls, 0) - fam.f(xm, y, cls, 0)) / (2 * h);
            double scale = std::max(1.0, J.col(s).norm());
            if ((fd - J.col(s)).norm() > 1e-6 * scale * 10)
                throw std::invalid_argument("Jacobian fails finite-difference check");
        }
    }
}

namespace {

Eigen::VectorXd label_of(const AmpInstance& inst, int i) {
    if (inst.fam.label_dim == 0) return Eigen::VectorXd();
    return inst.labels.row(i).transpose();
}

void check_finite(const Eigen::MatrixXd& m, int t) {
    if (!m.allFinite()) throw DivergenceError(t);
}

}  // namespace

OrbitState amp_init(const AmpInstance& inst) {
    OrbitState s;
    s.x_curr = inst.x0;
    s.x_prev = Eigen::MatrixXd::Zero(inst.N(), inst.q);
    return s;
}

OrbitState amp_step(const AmpInstance& inst, const OrbitState& state,
                    SymOnsager onsager) {
    const int n = inst.N();
    const int q = inst.q;
    if (state.x_curr.rows() != n || state.x_curr.cols() != q)
        throw std::invalid_argument("state shape does not match instance");
    if (onsager == SymOnsager::averaged && !inst.profile)
        throw std::invalid_argument("averaged Onsager needs a variance profile");

    Eigen::MatrixXd fx(n, q);            // f^j(x^t_j, t)
    std::vector<Eigen::MatrixXd> jx(n);  // df^j/dx at x^t_j
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd xj = state.x_curr.row(j).transpose();
        Eigen::VectorXd yj = label_of(inst, j);
        fx.row(j) = inst.fam.f(xj, yj, inst.partition[j], state.t).transpose();
        jx[j] = inst.fam.jac(xj, yj, inst.partition[j], state.t);
    }

    OrbitState next;
    next.t = state.t + 1;
    next.x_prev = state.x_curr;
    next.x_curr = inst.A * fx;

    if (state.t > 0) {
        std::vector<int> cls;
        if (onsager == SymOnsager::averaged)
            cls = inst.profile->assign_classes(n);
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(q, q);
            for (int j = 0; j < n; ++j) {
                double w;
                if (onsager == SymOnsager::realized) {
                    w = inst.A(i, j) * inst.A(i, j);
                    if (w == 0.0) continue;
                } else {
                    if (i == j) continue;
                    w = inst.profile->W(cls[i], cls[j]) / n;
                }
                B += w * jx[j];
            }
            Eigen::VectorXd xi_prev = state.x_prev.row(i).transpose();
            Eigen::VectorXd f_prev = inst.fam.f(xi_prev, label_of(inst, i),
                                                inst.partition[i], state.t - 1);
            next.x_curr.row(i) -= (B * f_prev).transpose();
        }
    }
    check_finite(next.x_curr, next.t);
    return next;
}

MessageState mp_init(const AmpInstance& inst) {
    const int n = inst.N();
    MessageState s;
    s.msgs.resize(n * n, inst.q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s.msgs.row(i * n + j) = inst.x0.row(i);
    s.z_node = inst.x0;
    return s;
}

namespace {

MessageState mp_step_with(const AmpInstance& inst, const MessageState& state,
                          const Eigen::MatrixXd& A) {
    const int n = inst.N();
    const int q = inst.q;
    if (state.msgs.rows() != n * n)
        throw std::invalid_argument("message state does not match instance");

    // fv.row(l*n+i) = f^l(z^t_{l->i}, t)
    Eigen::MatrixXd fv(n * n, q);
    for (int l = 0; l < n; ++l) {
        Eigen::VectorXd yl = label_of(inst, l);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd z = state.msgs.row(l * n + i).transpose();
            fv.row(l * n + i) =
                inst.fam.f(z, yl, inst.partition[l], state.t).transpose();
        }
    }

    MessageState next;
    next.t = state.t + 1;
    next.msgs.resize(n * n, q);
    next.z_node.resize(n, q);
    for (int i = 0; i < n; ++i) {
        Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(q);
        for (int l = 0; l < n; ++l) total += A(l, i) * fv.row(l * n + i);
        next.z_node.row(i) = total;
        for (int j = 0; j < n; ++j)
            next.msgs.row(i * n + j) = total - A(j, i) * fv.row(j * n + i);
    }
    check_finite(next.msgs, next.t);
    return next;
}

}  // namespace

MessageState mp_step(const AmpInstance& inst, const MessageState& state) {
    return mp_step_with(inst, state, inst.A);
}

MessageState mp_iid_step(const AmpInstance& inst, const MessageState& state,
                         const Eigen::MatrixXd& fresh_A) {
    if (fresh_A.rows() != inst.N() || fresh_A.cols() != inst.N())
        throw std::invalid_argument("fresh matrix has wrong shape");
    return mp_step_with(inst, state, fresh_A);
}

std::vector<std::vector<double>> run_orbit(const AmpInstance& inst, int T,
                                           const std::vector<OrbitObserver>& observers,
                                           SymOnsager onsager) {
    if (T < 1) throw std::invalid_argument("T must be at least 1");
    std::vector<std::vector<double>> out;
    OrbitState state = amp_init(inst);
    for (int t = 0; t < T; ++t) {
        try {
            state = amp_step(inst, state, onsager);
        } catch (DivergenceError& e) {
            e.partial = out;
            throw;
        }
        std::vector<double> row;
        row.reserve(observers.size());
        for (const auto& obs : observers) row.push_back(obs(inst, state));
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace ampu
