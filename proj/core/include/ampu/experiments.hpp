#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ampu/cs_lasso.hpp"
#include "ampu/ensembles.hpp"

namespace ampu {

// Runs fn(0..num_tasks-1) on a pool of worker threads. Each task writes
// only to its own output slot, so results are deterministic regardless of
// scheduling.
void parallel_for(int num_tasks, int threads, const std::function<void(int)>& fn);

// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(int successes, int trials);

struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    std::vector<std::pair<double, double>> grid;  // (delta, rho)
    int n = 1000;
    int trials = 50;
    std::vector<EnsembleSpec> ensembles;
    NonzeroLaw nonzero_law = NonzeroLaw::unit_gaussian;
    SolveParams solver;
    int threads = 1;

    void validate() const;
};

void from_json(const nlohmann::json& j, ExperimentConfig& cfg);
nlohmann::json config_metadata(const ExperimentConfig& cfg);

struct PhasePoint {
    double delta = 0.0;
    double rho = 0.0;
    std::string ensemble;
    int n = 0;
    int trials = 0;
    int successes = 0;
    double success_fraction = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    int divergences = 0;
    std::uint64_t seed = 0;  // reproduces this row's trial block
};

struct PhaseDiagramResult {
    std::vector<PhasePoint> points;
    std::string csv;
};

// Success fractions of l1-AMP recovery over the (delta, rho) grid for each
// ensemble. rho maps to the signal sparsity via eps = rho * delta.
PhaseDiagramResult run_phase_diagram(const ExperimentConfig& cfg);

struct ThresholdEstimate {
    double rho_hat = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // final bisection bracket
    bool flagged = false;              // non-monotone success profile
    std::vector<PhasePoint> probes;
};

// Locates the 50%-success crossing in rho by bisection; a probit fit over
// the probe points refines the estimate when it is well conditioned.
ThresholdEstimate estimate_threshold(double delta, const EnsembleSpec& ensemble,
                                     NonzeroLaw law, int n, int trials_per_probe,
                                     int probes, std::uint64_t seed, int threads,
                                     const SolveParams& solver = {});

struct UniversalityConfig {
    std::vector<int> sizes = {50, 200};
    int trials = 2000;
    int t_max = 3;
    int degree_max = 3;
    std::vector<EnsembleSpec> ensembles;  // compared pairwise against [0]
    std::uint64_t master_seed = 1;
    int threads = 1;
};

struct UniversalityRow {
    int N = 0;
    int t = 0;
    int moment = 0;
    std::string ensemble_a, ensemble_b;
    double moment_a = 0.0, moment_b = 0.0;
    double gap = 0.0;
    double combined_se = 0.0;
};

struct UniversalityReport {
    std::vector<UniversalityRow> rows;
    bool flagged = false;  // some gap exceeded 4 combined SEs at the largest N
    std::string csv;
    // Root-mean-square moment gap per size, in the order of cfg.sizes.
    std::vector<double> rms_gap;
};

// Symmetric AMP with a fixed quadratic scalar component function; compares
// per-iteration monomial moments across ensembles with matched first and
// second entry moments.
UniversalityReport universality_report(const UniversalityConfig& cfg);

struct SeCheckRow {
    int t = 0;
    std::string statistic;
    double empirical = 0.0;
    double predicted = 0.0;
    double se = 0.0;  // Monte Carlo standard error of `empirical`
    double z = 0.0;
};

struct SeCheckReport {
    std::vector<SeCheckRow> rows;
    bool flagged = false;  // some |z| above 4
    std::string csv;
};

struct SeCheckConfig {
    int n = 4000;
    double delta = 0.5;
    double eps = 0.1;
    double alpha = -1.0;  // < 0: alpha*(eps)
    int t_max = 10;
    int trials = 200;
    EnsembleSpec ensemble = EnsembleSpec::gaussian();
    NonzeroLaw law = NonzeroLaw::unit_gaussian;
    // Threshold scale fed to the iteration; predictions always come from the
    // scalar SE recursion. The empirical proxy keeps the realized run on the
    // SE trajectory longer at finite n (see SolveParams::sigma_mode).
    SigmaMode sigma_mode = SigmaMode::empirical;
    std::uint64_t master_seed = 1;
    int threads = 1;
    std::vector<std::pair<int, int>> two_time_pairs = {{4, 2}, {6, 3}};
};

// Empirical l1-AMP statistics (per-coordinate MSE, averaged Onsager
// coefficient, two-time differences) against scalar-SE predictions.
SeCheckReport se_vs_empirical_report(const SeCheckConfig& cfg);

}  // namespace ampu
