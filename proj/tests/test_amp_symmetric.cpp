#include <doctest.h>

#include "ampu/amp_symmetric.hpp"
#include "ampu/ensembles.hpp"

using namespace ampu;

namespace {

AmpInstance two_node_instance(double a) {
    AmpInstance inst;
    inst.A.resize(2, 2);
    inst.A << 0, a, a, 0;
    inst.q = 1;
    inst.fam = ComponentFamily::identity(1);
    inst.x0.resize(2, 1);
    inst.x0 << 1, 0;
    inst.partition = {0, 0};
    inst.labels.resize(2, 0);
    return inst;
}

}  // namespace

TEST_CASE("two node orbit by hand") {
    double a = 0.8;
    auto inst = two_node_instance(a);
    inst.validate();
    auto s0 = amp_init(inst);
    CHECK(s0.t == 0);
    auto s1 = amp_step(inst, s0);
    // x^1 = A x^0 (no memory term at t = 0)
    CHECK(s1.x_curr(0, 0) == doctest::Approx(0.0));
    CHECK(s1.x_curr(1, 0) == doctest::Approx(a).epsilon(1e-14));
    auto s2 = amp_step(inst, s1);
    // x^2 = A^2 x^0 - a^2 x^0 = 0 for the identity component function
    CHECK(std::abs(s2.x_curr(0, 0)) < 1e-14);
    CHECK(std::abs(s2.x_curr(1, 0)) < 1e-14);
}

TEST_CASE("validation rejects malformed instances") {
    auto inst = two_node_instance(0.5);
    SUBCASE("asymmetric matrix") {
        inst.A(0, 1) = 0.7;
        CHECK_THROWS(inst.validate());
    }
    SUBCASE("nonzero diagonal") {
        inst.A(0, 0) = 0.1;
        CHECK_THROWS(inst.validate());
    }
    SUBCASE("inconsistent jacobian") {
        inst.fam.jac = [](const Eigen::VectorXd&, const Eigen::VectorXd&, int,
                          int) { return Eigen::MatrixXd::Constant(1, 1, 5.0); };
        CHECK_THROWS(inst.validate());
    }
}

TEST_CASE("polynomial component family jacobian") {
    // f(x) = 0.4 x + 0.2 x^2
    MultiPoly p(1);
    p.add_term({1}, 0.4);
    p.add_term({2}, 0.2);
    auto fam = ComponentFamily::from_polys(1, 0, {{p}});
    Eigen::VectorXd x(1), y(0);
    x << 1.5;
    CHECK(fam.f(x, y, 0, 0)(0) == doctest::Approx(0.4 * 1.5 + 0.2 * 2.25));
    CHECK(fam.jac(x, y, 0, 0)(0, 0) == doctest::Approx(0.4 + 0.4 * 1.5));
    CHECK(fam.has_polys());
}

TEST_CASE("averaged onsager equals realized for constant-magnitude entries") {
    // rademacher entries have A_ij^2 = 1/N exactly, so W/N reweighting with
    // the unit profile reproduces the realized coefficient.
    const int N = 60;
    auto prof = std::make_shared<VarianceProfile>(VarianceProfile::single(1.0));
    AmpInstance inst;
    inst.A = sample_symmetric(*prof, EnsembleSpec::rademacher(), N, 4);
    inst.q = 1;
    MultiPoly p(1);
    p.add_term({1}, 0.4);
    p.add_term({2}, 0.2);
    inst.fam = ComponentFamily::from_polys(1, 0, {{p}});
    inst.x0 = Eigen::MatrixXd::Ones(N, 1);
    inst.partition.assign(N, 0);
    inst.labels.resize(N, 0);
    inst.profile = prof;

    auto s = amp_step(inst, amp_init(inst));
    auto r = amp_step(inst, s, SymOnsager::realized);
    auto av = amp_step(inst, s, SymOnsager::averaged);
    CHECK((r.x_curr - av.x_curr).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("divergence raises with the partial summaries attached") {
    const int N = 8;
    AmpInstance inst;
    inst.A = 20.0 * sample_symmetric(VarianceProfile::single(1.0),
                                     EnsembleSpec::gaussian(), N, 2);
    inst.q = 1;
    MultiPoly p(1);
    p.add_term({3}, 1.0);  // f(x) = x^3 blows up under the inflated matrix
    inst.fam = ComponentFamily::from_polys(1, 0, {{p}});
    inst.x0 = Eigen::MatrixXd::Ones(N, 1);
    inst.partition.assign(N, 0);
    inst.labels.resize(N, 0);

    std::vector<OrbitObserver> obs = {
        [](const AmpInstance&, const OrbitState& s) {
            return s.x_curr.squaredNorm();
        }};
    bool threw = false;
    try {
        run_orbit(inst, 50, obs);
    } catch (const DivergenceError& e) {
        threw = true;
        CHECK(e.t > 0);
        CHECK(int(e.partial.size()) < 50);
    }
    CHECK(threw);
}

TEST_CASE("orbit summaries have the requested shape") {
    auto inst = two_node_instance(0.3);
    std::vector<OrbitObserver> obs = {
        [](const AmpInstance&, const OrbitState& s) { return s.x_curr(0, 0); },
        [](const AmpInstance&, const OrbitState& s) { return s.x_curr(1, 0); }};
    auto sums = run_orbit(inst, 4, obs);
    REQUIRE(sums.size() == 4);
    for (const auto& row : sums) CHECK(row.size() == 2);
    CHECK(sums[0][1] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("message iteration with fresh matrices stays finite") {
    const int N = 30;
    AmpInstance inst;
    inst.A = sample_symmetric(VarianceProfile::single(1.0),
                              EnsembleSpec::gaussian(), N, 5);
    inst.q = 1;
    MultiPoly p(1);
    p.add_term({1}, 0.5);
    inst.fam = ComponentFamily::from_polys(1, 0, {{p}});
    inst.x0 = Eigen::MatrixXd::Ones(N, 1);
    inst.partition.assign(N, 0);
    inst.labels.resize(N, 0);

    auto ms = mp_init(inst);
    for (int t = 0; t < 3; ++t) {
        Eigen::MatrixXd fresh = sample_symmetric(
            VarianceProfile::single(1.0), EnsembleSpec::gaussian(), N, 100 + t);
        ms = mp_iid_step(inst, ms, fresh);
    }
    CHECK(ms.t == 3);
    CHECK(ms.z_node.allFinite());
    CHECK(ms.msgs.allFinite());
}
