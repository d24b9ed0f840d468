#include <doctest.h>

#include "ampu/amp_bipartite.hpp"
#include "ampu/ensembles.hpp"

using namespace ampu;

namespace {

ComponentFamily quad_family(double lin, double quad) {
    MultiPoly p(1);
    p.add_term({1}, lin);
    p.add_term({2}, quad);
    return ComponentFamily::from_polys(1, 0, {{p}});
}

BipartiteInstance random_instance(int m, int n, std::uint64_t seed) {
    BipartiteInstance inst;
    inst.A = sample_rectangular(EnsembleSpec::gaussian(), m, n, seed);
    inst.delta = double(m) / n;
    inst.q = 1;
    inst.f = quad_family(0.5, 0.1);
    inst.h = quad_family(0.3, 0.05);
    inst.x0.resize(n, 1);
    std::mt19937_64 rng(seed ^ 0x5eedULL);
    std::normal_distribution<double> g;
    for (int i = 0; i < n; ++i) inst.x0(i, 0) = g(rng);
    inst.labels_y.resize(n, 0);
    inst.labels_w.resize(m, 0);
    return inst;
}

Eigen::VectorXd apply(const ComponentFamily& fam, const Eigen::VectorXd& v, int t) {
    Eigen::VectorXd out(v.size()), y(0);
    for (int i = 0; i < v.size(); ++i)
        out[i] = fam.f(v.segment(i, 1), y, 0, t)(0);
    return out;
}

Eigen::VectorXd apply_jac(const ComponentFamily& fam, const Eigen::VectorXd& v,
                          int t) {
    Eigen::VectorXd out(v.size()), y(0);
    for (int i = 0; i < v.size(); ++i)
        out[i] = fam.jac(v.segment(i, 1), y, 0, t)(0, 0);
    return out;
}

}  // namespace

TEST_CASE("first bipartite steps by hand") {
    auto inst = random_instance(6, 12, 3);
    inst.validate();
    auto s0 = bipartite_init(inst);
    CHECK(s0.x.rows() == 12);
    CHECK(s0.z.isZero());

    auto s1 = bipartite_step(inst, s0);
    // z^0 = A f(x^0) with no memory term
    Eigen::VectorXd fx = apply(inst.f, inst.x0.col(0), 0);
    Eigen::VectorXd z0 = inst.A * fx;
    CHECK((s1.z.col(0) - z0).cwiseAbs().maxCoeff() < 1e-12);
    // x^1 = A^T h(z^0) - D_0 f(x^0), D_i = sum_j A_ji^2 h'(z^0_j)
    Eigen::VectorXd hz = apply(inst.h, z0, 0);
    Eigen::VectorXd hpz = apply_jac(inst.h, z0, 0);
    Eigen::VectorXd D = inst.A.array().square().matrix().transpose() * hpz;
    Eigen::VectorXd x1 = inst.A.transpose() * hz - D.cwiseProduct(fx);
    CHECK((s1.x.col(0) - x1).cwiseAbs().maxCoeff() < 1e-12);

    auto s2 = bipartite_step(inst, s1);
    // z^1 = A f(x^1) - B_1 h(z^0), B_j = sum_i A_ji^2 f'(x^1_i)
    Eigen::VectorXd fx1 = apply(inst.f, x1, 1);
    Eigen::VectorXd fpx1 = apply_jac(inst.f, x1, 1);
    Eigen::VectorXd B = inst.A.array().square().matrix() * fpx1;
    Eigen::VectorXd z1 = inst.A * fx1 - B.cwiseProduct(hz);
    CHECK((s2.z.col(0) - z1).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("instance validation checks the aspect ratio") {
    auto inst = random_instance(6, 12, 3);
    inst.delta = 0.9;
    CHECK_THROWS(inst.validate());
}

TEST_CASE("symmetric embedding reproduces the bipartite orbit") {
    const int m = 10, n = 20, T = 3;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CAPTURE(seed);
        auto inst = random_instance(m, n, seed);
        auto sym = symmetric_embedding(inst);
        sym.validate();
        REQUIRE(sym.N() == m + n);

        auto bs = bipartite_init(inst);
        auto ss = amp_init(sym);
        for (int t = 0; t < T; ++t) {
            bs = bipartite_step(inst, bs);
            ss = amp_step(sym, ss);  // odd step 2t+1: class 0 rows carry z^t
            for (int i = 0; i < m; ++i)
                CHECK(std::abs(ss.x_curr(i, 0) - bs.z(i, 0)) < 1e-9);
            ss = amp_step(sym, ss);  // even step 2t+2: class 1 rows carry x^{t+1}
            for (int i = 0; i < n; ++i)
                CHECK(std::abs(ss.x_curr(m + i, 0) - bs.x(i, 0)) < 1e-9);
        }
    }
}

TEST_CASE("linear bipartite state evolution closed form") {
    BipartiteSeModel model;
    model.delta = 0.5;
    model.q = 1;
    MultiPoly f(1), h(1);
    f.add_term({1}, 0.8);
    h.add_term({1}, 0.6);
    model.f = {f};
    model.h = {h};
    model.law_y = GaussianMixture::none();
    model.law_w = GaussianMixture::none();
    model.validate();

    double xi0 = 0.3;
    auto traj = se_bipartite_run(model, Eigen::MatrixXd::Constant(1, 1, xi0), 5);
    REQUIRE(traj.size() == 6);
    double xi = xi0;
    for (int t = 1; t <= 5; ++t) {
        double sigma = 0.36 * xi;
        xi = 0.64 * sigma / 0.5;
        CHECK(traj[t].Sigma(0, 0) == doctest::Approx(sigma).epsilon(1e-12));
        CHECK(traj[t].Xi(0, 0) == doctest::Approx(xi).epsilon(1e-12));
    }
}

TEST_CASE("bipartite two time diagonal consistency") {
    BipartiteSeModel model;
    model.delta = 0.5;
    model.q = 1;
    MultiPoly f(1), h(1);
    f.add_term({1}, 0.8);
    f.add_term({2}, 0.05);
    h.add_term({1}, 0.6);
    h.add_term({2}, -0.04);
    model.f = {f};
    model.h = {h};
    model.law_y = GaussianMixture::none();
    model.law_w = GaussianMixture::none();

    int T = 4;
    Eigen::MatrixXd xi0 = Eigen::MatrixXd::Constant(1, 1, 0.3);
    auto traj = se_bipartite_run(model, xi0, T);
    auto table = se_two_time_bipartite(model, xi0, T);
    REQUIRE(table.T == T);
    for (int t = 1; t <= T; ++t) {
        const auto& S = table.Sigma[t][t];
        CHECK(S(0, 0) == doctest::Approx(traj[t].Sigma(0, 0)).epsilon(1e-10));
        CHECK(S(1, 1) == doctest::Approx(traj[t].Sigma(0, 0)).epsilon(1e-10));
        CHECK(S(0, 1) == doctest::Approx(traj[t].Sigma(0, 0)).epsilon(1e-10));
    }
}
