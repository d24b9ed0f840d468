#include <doctest.h>

#include <json.hpp>

#include "ampu/ensembles.hpp"
#include "ampu/rng.hpp"

using namespace ampu;

TEST_CASE("ensemble spec validation") {
    CHECK_THROWS_AS(EnsembleSpec::sparse(0.0).validate(), EnsembleError);
    CHECK_THROWS_AS(EnsembleSpec::sparse(1.5).validate(), EnsembleError);
    EnsembleSpec bad_mix;
    bad_mix.kind = EntryKind::mixture;
    bad_mix.nu0 = 0.5;
    CHECK_THROWS_AS(bad_mix.validate(), EnsembleError);
    CHECK_NOTHROW(EnsembleSpec::gaussian().validate());
    CHECK_NOTHROW(EnsembleSpec::mixture_of(EnsembleSpec::rademacher(), 0.5).validate());
}

TEST_CASE("ensemble tags are distinct") {
    std::vector<std::string> tags = {
        EnsembleSpec::gaussian().tag(),
        EnsembleSpec::rademacher().tag(),
        EnsembleSpec::uniform_pm().tag(),
        EnsembleSpec::sparse(0.3).tag(),
        EnsembleSpec::mixture_of(EnsembleSpec::rademacher(), 0.5).tag(),
    };
    for (size_t a = 0; a < tags.size(); ++a)
        for (size_t b = a + 1; b < tags.size(); ++b) CHECK(tags[a] != tags[b]);
}

TEST_CASE("ensemble json round trip") {
    for (auto spec : {EnsembleSpec::gaussian(), EnsembleSpec::sparse(0.3),
                      EnsembleSpec::mixture_of(EnsembleSpec::rademacher(), 0.7)}) {
        nlohmann::json j = spec;
        auto back = j.get<EnsembleSpec>();
        CHECK(back.tag() == spec.tag());
        CHECK(back.kind == spec.kind);
        CHECK(back.p == doctest::Approx(spec.p));
        CHECK(back.nu0 == doctest::Approx(spec.nu0));
    }
}

TEST_CASE("rectangular sampling matches the target moments") {
    const int m = 150, n = 120;
    SUBCASE("gaussian 1/m") {
        Eigen::MatrixXd A = sample_rectangular(EnsembleSpec::gaussian(), m, n, 7);
        CHECK(A.rows() == m);
        CHECK(A.cols() == n);
        double mean = A.mean();
        double var = A.array().square().mean();
        CHECK(std::abs(mean) < 3.0 / std::sqrt(double(m) * n * m));
        CHECK(var == doctest::Approx(1.0 / m).epsilon(0.05));
    }
    SUBCASE("rademacher entries are exactly +-1/sqrt(m)") {
        Eigen::MatrixXd A = sample_rectangular(EnsembleSpec::rademacher(), m, n, 7);
        double s = 1.0 / std::sqrt(double(m));
        CHECK(((A.array().abs() - s).abs() < 1e-15).all());
    }
    SUBCASE("sparse subgaussian variance and sparsity") {
        double p = 0.3;
        Eigen::MatrixXd A = sample_rectangular(EnsembleSpec::sparse(p), m, n, 7);
        double frac = (A.array() != 0.0).cast<double>().mean();
        CHECK(frac == doctest::Approx(p).epsilon(0.05));
        CHECK(A.array().square().mean() == doctest::Approx(1.0 / m).epsilon(0.05));
    }
    SUBCASE("mixture variance is (1+nu0^2)/m") {
        double nu0 = 0.5;
        auto spec = EnsembleSpec::mixture_of(EnsembleSpec::rademacher(), nu0);
        Eigen::MatrixXd A = sample_rectangular(spec, m, n, 7);
        CHECK(A.array().square().mean() ==
              doctest::Approx((1 + nu0 * nu0) / m).epsilon(0.05));
    }
    SUBCASE("1/n normalization") {
        Eigen::MatrixXd A = sample_rectangular(
            EnsembleSpec::gaussian(Normalization::var_one_over_n), m, n, 7);
        CHECK(A.array().square().mean() == doctest::Approx(1.0 / n).epsilon(0.05));
    }
}

TEST_CASE("sampling is deterministic in the seed") {
    Eigen::MatrixXd a = sample_rectangular(EnsembleSpec::gaussian(), 20, 30, 42);
    Eigen::MatrixXd b = sample_rectangular(EnsembleSpec::gaussian(), 20, 30, 42);
    Eigen::MatrixXd c = sample_rectangular(EnsembleSpec::gaussian(), 20, 30, 43);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("variance profile classes and symmetric sampling") {
    VarianceProfile prof;
    prof.k = 2;
    prof.W.resize(2, 2);
    prof.W << 1.0, 2.0, 2.0, 4.0;
    prof.fractions.resize(2);
    prof.fractions << 0.3, 0.7;
    prof.validate();

    auto cls = prof.assign_classes(10);
    CHECK(cls.size() == 10);
    int n0 = 0;
    for (size_t i = 0; i + 1 < cls.size(); ++i) CHECK(cls[i] <= cls[i + 1]);
    for (int c : cls) n0 += c == 0;
    CHECK(std::abs(n0 - 3) <= 1);

    const int N = 300;
    Eigen::MatrixXd A = sample_symmetric(prof, EnsembleSpec::gaussian(), N, 11);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(A.diagonal().cwiseAbs().maxCoeff() == 0.0);
    auto big = prof.assign_classes(N);
    double s00 = 0, s01 = 0, s11 = 0;
    int c00 = 0, c01 = 0, c11 = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (i == j) continue;
            double v = A(i, j) * A(i, j);
            if (big[i] == 0 && big[j] == 0) s00 += v, ++c00;
            else if (big[i] == 1 && big[j] == 1) s11 += v, ++c11;
            else s01 += v, ++c01;
        }
    CHECK(s00 / c00 == doctest::Approx(1.0 / N).epsilon(0.15));
    CHECK(s01 / c01 == doctest::Approx(2.0 / N).epsilon(0.15));
    CHECK(s11 / c11 == doctest::Approx(4.0 / N).epsilon(0.15));
}

TEST_CASE("variance profile validation") {
    VarianceProfile bad;
    bad.k = 2;
    bad.W = Eigen::MatrixXd::Ones(2, 2);
    bad.fractions.resize(2);
    bad.fractions << 0.6, 0.6;
    CHECK_THROWS_AS(bad.validate(), EnsembleError);
    CHECK_NOTHROW(VarianceProfile::single(1.0).validate());
}

TEST_CASE("signal sampling") {
    SignalSpec spec;
    spec.epsilon = 0.2;
    CHECK(spec.second_moment() == doctest::Approx(0.2));

    const int n = 200000;
    SUBCASE("unit gaussian nonzeros") {
        Eigen::VectorXd x = sample_signal(spec, n, 5);
        double frac = (x.array() != 0.0).cast<double>().mean();
        CHECK(frac == doctest::Approx(0.2).epsilon(0.02));
        CHECK(x.array().square().mean() == doctest::Approx(0.2).epsilon(0.05));
    }
    SUBCASE("plus one nonzeros") {
        spec.nonzero_law = NonzeroLaw::plus_one;
        Eigen::VectorXd x = sample_signal(spec, n, 5);
        for (int i = 0; i < n; ++i) CHECK((x[i] == 0.0 || x[i] == 1.0));
    }
    SUBCASE("signed unit nonzeros") {
        spec.nonzero_law = NonzeroLaw::signed_unit;
        Eigen::VectorXd x = sample_signal(spec, n, 5);
        for (int i = 0; i < n; ++i) CHECK((x[i] == 0.0 || std::abs(x[i]) == 1.0));
        double mean_nz = x.sum() / std::max(1.0, (x.array() != 0.0).cast<double>().sum());
        CHECK(std::abs(mean_nz) < 0.02);
    }
    SUBCASE("epsilon bounds enforced") {
        spec.epsilon = -0.1;
        CHECK_THROWS_AS(spec.validate(), EnsembleError);
        spec.epsilon = 1.5;
        CHECK_THROWS_AS(spec.validate(), EnsembleError);
        spec.epsilon = 0.0;  // degenerate all-zero signal is allowed
        CHECK_NOTHROW(spec.validate());
    }
}

TEST_CASE("seed streams decorrelate across indices") {
    auto r1 = make_stream(9, 0, 0, 0);
    auto r2 = make_stream(9, 0, 0, 1);
    CHECK(r1() != r2());
    auto r3 = make_stream(9, 0, 0, 0);
    auto r4 = make_stream(9, 0, 0, 0);
    CHECK(r3() == r4());
}
