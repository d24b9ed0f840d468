#include <benchmark/benchmark.h>

#include "ampu/cs_lasso.hpp"
#include "ampu/ensembles.hpp"
#include "ampu/phase_boundary.hpp"
#include "ampu/state_evolution.hpp"

using namespace ampu;

namespace {

SignalSpec sparse_signal() {
    SignalSpec sig;
    sig.epsilon = 0.1;
    return sig;
}

void BM_SampleGaussian(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto A = sample_rectangular(EnsembleSpec::gaussian(), n / 2, n, seed++);
        benchmark::DoNotOptimize(A.data());
    }
}
BENCHMARK(BM_SampleGaussian)->Arg(500)->Arg(2000);

void BM_SampleRademacher(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto A = sample_rectangular(EnsembleSpec::rademacher(), n / 2, n, seed++);
        benchmark::DoNotOptimize(A.data());
    }
}
BENCHMARK(BM_SampleRademacher)->Arg(500)->Arg(2000);

void BM_AmpStep(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    auto prob = CsProblem::make(EnsembleSpec::gaussian(), sparse_signal(), n, 0.5, 7);
    auto amp = cs_amp_init(prob);
    double alpha = alpha_star(0.1);
    for (auto _ : state) {
        cs_amp_step(prob, amp, alpha, SigmaMode::empirical, OnsagerMode::averaged,
                    nullptr);
        benchmark::DoNotOptimize(amp.x.data());
    }
}
BENCHMARK(BM_AmpStep)->Arg(500)->Arg(2000)->Arg(4000);

void BM_SolveL1(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto prob =
            CsProblem::make(EnsembleSpec::gaussian(), sparse_signal(), n, 0.5, seed++);
        auto res = solve_l1(prob, {});
        benchmark::DoNotOptimize(res.iterations);
    }
}
BENCHMARK(BM_SolveL1)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ScalarSeTrajectory(benchmark::State& state) {
    double alpha = alpha_star(0.1);
    for (auto _ : state) {
        auto traj = scalar_se_trajectory(alpha, 0.5, sparse_signal(), 50);
        benchmark::DoNotOptimize(traj.data());
    }
}
BENCHMARK(BM_ScalarSeTrajectory);

void BM_TwoTimeTable(benchmark::State& state) {
    double alpha = alpha_star(0.1);
    int T = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto R = two_time_table(alpha, 0.5, sparse_signal(), T);
        benchmark::DoNotOptimize(R.data());
    }
}
BENCHMARK(BM_TwoTimeTable)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_RhoStar(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(rho_star(0.5));
}
BENCHMARK(BM_RhoStar);

SeModel two_class_model() {
    SeModel model;
    model.k = 2;
    model.W.resize(2, 2);
    model.W << 1.0, 0.5, 0.5, 2.0;
    model.c.resize(2);
    model.c << 0.4, 0.6;
    model.q = 2;
    MultiPoly z0 = MultiPoly::variable(2, 0), z1 = MultiPoly::variable(2, 1);
    model.g = {{z0 * 0.9 + z1 * z1 * 0.1, z1 * 0.7},
               {z1 * 0.8, z0 * z0 * 0.2 + z0 * 0.3}};
    return model;
}

void BM_MatrixSeStep(benchmark::State& state) {
    auto model = two_class_model();
    std::vector<Eigen::MatrixXd> S0(2, Eigen::MatrixXd::Identity(2, 2));
    auto st = se_step(model, se_boundary(model, S0));
    for (auto _ : state) {
        auto next = se_step(model, st);
        benchmark::DoNotOptimize(next.Sigma.data());
    }
}
BENCHMARK(BM_MatrixSeStep);

}  // namespace

BENCHMARK_MAIN();
