#include "ampu/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ampu/amp_symmetric.hpp"
#include "ampu/gaussian.hpp"
#include "ampu/phase_boundary.hpp"
#include "ampu/rng.hpp"

namespace ampu {

void parallel_for(int num_tasks, int threads, const std::function<void(int)>& fn) {
    if (num_tasks <= 0) return;
    threads = std::max(1, std::min(threads, num_tasks));
    if (threads == 1) {
        for (int i = 0; i < num_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < num_tasks; i = next.fetch_add(1)) {
                if (failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::pair<double, double> wilson_interval(int successes, int trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double p = static_cast<double>(successes) / trials;
    double z2 = z * z;
    double denom = 1.0 + z2 / trials;
    double center = (p + z2 / (2.0 * trials)) / denom;
    double half = z *
                  std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) /
                  denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (grid.empty()) throw std::invalid_argument("grid must be nonempty");
    if (n < 2) throw std::invalid_argument("n too small");
    if (ensembles.empty()) throw std::invalid_argument("no ensembles configured");
    for (const auto& e : ensembles) e.validate();
    for (auto [d, r] : grid)
        if (!(d > 0.0 && d < 1.0 && r > 0.0 && r < 1.0))
            throw std::invalid_argument("grid points must lie in (0,1)^2");
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    cfg = ExperimentConfig{};
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("grid"))
        for (const auto& p : j["grid"])
            cfg.grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    if (j.contains("ensembles"))
        for (const auto& e : j["ensembles"])
            cfg.ensembles.push_back(e.get<EnsembleSpec>());
    if (j.contains("nonzero_law")) {
        SignalSpec s;
        nlohmann::json tmp{{"epsilon", 0.5}, {"nonzero_law", j["nonzero_law"]}};
        from_json(tmp, s);
        cfg.nonzero_law = s.nonzero_law;
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (s.contains("alpha")) cfg.solver.alpha = s["alpha"].get<double>();
        if (s.contains("max_iter")) cfg.solver.max_iter = s["max_iter"].get<int>();
        if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
    }
    cfg.validate();
}

nlohmann::json config_metadata(const ExperimentConfig& cfg) {
    nlohmann::json ens = nlohmann::json::array();
    for (const auto& e : cfg.ensembles) {
        nlohmann::json je;
        to_json(je, e);
        ens.push_back(je);
    }
    nlohmann::json grid = nlohmann::json::array();
    for (auto [d, r] : cfg.grid) grid.push_back({d, r});
    return nlohmann::json{{"master_seed", cfg.master_seed},
                          {"n", cfg.n},
                          {"trials", cfg.trials},
                          {"threads", cfg.threads},
                          {"grid", grid},
                          {"ensembles", ens},
                          {"solver",
                           {{"alpha", cfg.solver.alpha},
                            {"max_iter", cfg.solver.max_iter},
                            {"tol", cfg.solver.tol}}}};
}

namespace {

std::uint64_t block_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(master) ^ mix64((a << 20) ^ b ^ 0xb10cULL));
}

PhasePoint run_point(double delta, double rho, const EnsembleSpec& ensemble,
                     NonzeroLaw law, int n, int trials,
                     const SolveParams& solver, std::uint64_t seed,
                     int threads) {
    SignalSpec signal;
    signal.epsilon = rho * delta;
    signal.nonzero_law = law;
    SolveParams params = solver;
    if (params.alpha < 0.0 && signal.epsilon > 0.0 && signal.epsilon < 1.0)
        params.alpha = alpha_star(signal.epsilon);

    std::vector<int> ok(trials, 0), div(trials, 0);
    parallel_for(trials, threads, [&](int trial) {
        auto p = CsProblem::make(ensemble, signal, n, delta,
                                 mix64(seed ^ static_cast<std::uint64_t>(trial)));
        auto res = solve_l1(p, params);
        ok[trial] = res.success ? 1 : 0;
        div[trial] = res.diverged ? 1 : 0;
    });

    PhasePoint pt;
    pt.delta = delta;
    pt.rho = rho;
    pt.ensemble = ensemble.tag();
    pt.n = n;
    pt.trials = trials;
    for (int v : ok) pt.successes += v;
    for (int v : div) pt.divergences += v;
    pt.success_fraction = static_cast<double>(pt.successes) / trials;
    std::tie(pt.ci_lo, pt.ci_hi) = wilson_interval(pt.successes, trials);
    pt.seed = seed;
    return pt;
}

std::string phase_csv(const std::vector<PhasePoint>& pts) {
    std::ostringstream os;
    os.precision(17);
    os << "delta,rho,ensemble,n,trials,successes,success_fraction,ci_lo,ci_hi,"
          "divergences,seed\n";
    for (const auto& p : pts)
        os << p.delta << ',' << p.rho << ',' << p.ensemble << ',' << p.n << ','
           << p.trials << ',' << p.successes << ',' << p.success_fraction << ','
           << p.ci_lo << ',' << p.ci_hi << ',' << p.divergences << ',' << p.seed
           << '\n';
    return os.str();
}

}  // namespace

PhaseDiagramResult run_phase_diagram(const ExperimentConfig& cfg) {
    cfg.validate();
    PhaseDiagramResult out;
    for (std::size_t pi = 0; pi < cfg.grid.size(); ++pi) {
        for (std::size_t ei = 0; ei < cfg.ensembles.size(); ++ei) {
            auto [delta, rho] = cfg.grid[pi];
            out.points.push_back(run_point(
                delta, rho, cfg.ensembles[ei], cfg.nonzero_law, cfg.n, cfg.trials,
                cfg.solver, block_seed(cfg.master_seed, pi, ei), cfg.threads));
        }
    }
    out.csv = phase_csv(out.points);
    return out;
}

namespace {

double inv_norm(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ThresholdEstimate estimate_threshold(double delta, const EnsembleSpec& ensemble,
                                     NonzeroLaw law, int n, int trials_per_probe,
                                     int probes, std::uint64_t seed, int threads,
                                     const SolveParams& solver) {
    if (probes < 6) throw std::invalid_argument("at least 6 probes required");
    if (trials_per_probe < 1) throw std::invalid_argument("trials must be positive");
    double lo = 0.02, hi = 0.98;
    ThresholdEstimate est;
    for (int i = 0; i < probes; ++i) {
        double mid = 0.5 * (lo + hi);
        auto pt = run_point(delta, mid, ensemble, law, n, trials_per_probe, solver,
                            block_seed(seed, 0x9c0beULL, i), threads);
        est.probes.push_back(pt);
        if (pt.success_fraction >= 0.5)
            lo = mid;
        else
            hi = mid;
    }
    est.ci_lo = lo;
    est.ci_hi = hi;
    est.rho_hat = 0.5 * (lo + hi);

    // Success should be nonincreasing in rho; flag violations beyond the
    // Wilson half-widths.
    auto sorted = est.probes;
    std::sort(sorted.begin(), sorted.end(),
              [](const PhasePoint& a, const PhasePoint& b) { return a.rho < b.rho; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double rise = sorted[i].success_fraction - sorted[i - 1].success_fraction;
        double slack = (sorted[i - 1].success_fraction - sorted[i - 1].ci_lo) +
                       (sorted[i].ci_hi - sorted[i].success_fraction);
        if (rise > slack) est.flagged = true;
    }

    // Probit fit over informative probes refines the crossing estimate.
    // Saturated probes (all success / all failure) carry no slope
    // information and would drag the fitted crossing toward them.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& p : sorted) {
        if (p.successes == 0 || p.successes == p.trials) continue;
        double y = inv_norm(p.success_fraction);
        sx += p.rho;
        sy += y;
        sxx += p.rho * p.rho;
        sxy += p.rho * y;
        ++cnt;
    }
    double det = cnt * sxx - sx * sx;
    if (cnt >= 3 && std::abs(det) > 1e-12) {
        double b = (cnt * sxy - sx * sy) / det;
        double a = (sy - b * sx) / cnt;
        if (b < 0.0) {
            double fit = -a / b;
            if (fit > est.ci_lo - 0.05 && fit < est.ci_hi + 0.05)
                est.rho_hat = fit;
        }
    }
    return est;
}

UniversalityReport universality_report(const UniversalityConfig& cfg) {
    if (cfg.ensembles.size() < 2)
        throw std::invalid_argument("need at least two ensembles to compare");
    if (cfg.trials < 2 || cfg.t_max < 1 || cfg.degree_max < 1)
        throw std::invalid_argument("invalid universality configuration");
    for (const auto& e : cfg.ensembles) e.validate();

    // Fixed scalar quadratic component function and all-ones start.
    MultiPoly f(1);
    f.add_term({1}, 0.4);
    f.add_term({2}, 0.2);
    auto fam = ComponentFamily::from_polys(1, 0, {{f}});
    auto profile = VarianceProfile::single(1.0);

    const int E = static_cast<int>(cfg.ensembles.size());
    const int stats = cfg.t_max * cfg.degree_max;

    UniversalityReport rep;
    std::ostringstream os;
    os.precision(17);
    os << "N,t,moment,ensemble_a,ensemble_b,moment_a,moment_b,gap,combined_se\n";

    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
        int N = cfg.sizes[si];
        // mean/variance accumulators per (ensemble, stat)
        std::vector<std::vector<std::vector<double>>> samples(
            E, std::vector<std::vector<double>>(stats,
                                                std::vector<double>(cfg.trials)));
        for (int e = 0; e < E; ++e) {
            parallel_for(cfg.trials, cfg.threads, [&, e](int trial) {
                AmpInstance inst;
                inst.q = 1;
                inst.fam = fam;
                inst.A = sample_symmetric(
                    profile, cfg.ensembles[e], N,
                    block_seed(cfg.master_seed, (si << 8) ^ e, trial));
                inst.x0 = Eigen::MatrixXd::Ones(N, 1);
                inst.partition.assign(N, 0);
                OrbitState st = amp_init(inst);
                for (int t = 1; t <= cfg.t_max; ++t) {
                    st = amp_step(inst, st);
                    for (int m = 1; m <= cfg.degree_max; ++m) {
                        double acc = 0.0;
                        for (int i = 0; i < N; ++i)
                            acc += std::pow(st.x_curr(i, 0), m);
                        samples[e][(t - 1) * cfg.degree_max + (m - 1)][trial] =
                            acc / N;
                    }
                }
            });
        }
        auto mean_se = [&](int e, int s) {
            double mu = 0.0;
            for (double v : samples[e][s]) mu += v;
            mu /= cfg.trials;
            double var = 0.0;
            for (double v : samples[e][s]) var += (v - mu) * (v - mu);
            var /= (cfg.trials - 1);
            return std::make_pair(mu, std::sqrt(var / cfg.trials));
        };
        double sq_sum = 0.0;
        int cnt = 0;
        for (int e = 1; e < E; ++e) {
            for (int t = 1; t <= cfg.t_max; ++t)
                for (int m = 1; m <= cfg.degree_max; ++m) {
                    int s = (t - 1) * cfg.degree_max + (m - 1);
                    auto [ma, sa] = mean_se(0, s);
                    auto [mb, sb] = mean_se(e, s);
                    UniversalityRow row;
                    row.N = N;
                    row.t = t;
                    row.moment = m;
                    row.ensemble_a = cfg.ensembles[0].tag();
                    row.ensemble_b = cfg.ensembles[e].tag();
                    row.moment_a = ma;
                    row.moment_b = mb;
                    row.gap = ma - mb;
                    row.combined_se = std::sqrt(sa * sa + sb * sb);
                    if (si + 1 == cfg.sizes.size() &&
                        std::abs(row.gap) > 4.0 * row.combined_se)
                        rep.flagged = true;
                    sq_sum += row.gap * row.gap;
                    ++cnt;
                    os << N << ',' << t << ',' << m << ',' << row.ensemble_a << ','
                       << row.ensemble_b << ',' << ma << ',' << mb << ','
                       << row.gap << ',' << row.combined_se << '\n';
                    rep.rows.push_back(std::move(row));
                }
        }
        rep.rms_gap.push_back(std::sqrt(sq_sum / std::max(1, cnt)));
    }
    rep.csv = os.str();
    return rep;
}

SeCheckReport se_vs_empirical_report(const SeCheckConfig& cfg) {
    if (cfg.trials < 2 || cfg.t_max < 1)
        throw std::invalid_argument("invalid SE check configuration");
    SignalSpec signal;
    signal.epsilon = cfg.eps;
    signal.nonzero_law = cfg.law;
    double alpha = cfg.alpha < 0.0 ? alpha_star(cfg.eps) : cfg.alpha;

    int t_hi = cfg.t_max;
    for (auto [a, b] : cfg.two_time_pairs) t_hi = std::max({t_hi, a, b});
    auto sig = scalar_se_trajectory(alpha, cfg.delta, signal, t_hi + 1);
    auto R = two_time_table(alpha, cfg.delta, signal, t_hi);

    const int n_mse = cfg.t_max;
    const int n_b = cfg.t_max;
    const int n_tt = static_cast<int>(cfg.two_time_pairs.size());
    const int stats = n_mse + n_b + n_tt;
    std::vector<std::vector<double>> samples(stats,
                                             std::vector<double>(cfg.trials));

    parallel_for(cfg.trials, cfg.threads, [&](int trial) {
        auto prob = CsProblem::make(cfg.ensemble, signal, cfg.n, cfg.delta,
                                    block_seed(cfg.master_seed, 0x5eULL, trial));
        CsAmpState st = cs_amp_init(prob);
        std::vector<Eigen::VectorXd> x_at(t_hi + 1);
        x_at[0] = st.x;
        std::vector<double> b_at(t_hi + 1, 0.0);
        for (int t = 1; t <= t_hi; ++t) {
            cs_amp_step(prob, st, alpha, cfg.sigma_mode,
                        OnsagerMode::averaged, &sig);
            x_at[t] = st.x;
            b_at[t] = st.b;  // coefficient used when forming z^{t-1}->z^t
        }
        for (int t = 1; t <= cfg.t_max; ++t) {
            samples[t - 1][trial] =
                (x_at[t] - prob.x0).squaredNorm() / prob.A.cols();
            // b_{t} is applied inside step t+1; record the coefficient the
            // solver would use after iterate t.
            samples[n_mse + t - 1][trial] =
                static_cast<double>((x_at[t].array() != 0.0).count()) /
                prob.A.rows();
        }
        for (int k = 0; k < n_tt; ++k) {
            auto [ta, tb] = cfg.two_time_pairs[k];
            samples[n_mse + n_b + k][trial] =
                (x_at[ta] - x_at[tb]).squaredNorm() / prob.A.cols();
        }
    });

    SeCheckReport rep;
    std::ostringstream os;
    os.precision(17);
    os << "t,statistic,empirical,predicted,se,z\n";
    auto add_row = [&](int t, const std::string& name, int sidx, double pred) {
        double mu = 0.0;
        for (double v : samples[sidx]) mu += v;
        mu /= cfg.trials;
        double var = 0.0;
        for (double v : samples[sidx]) var += (v - mu) * (v - mu);
        var /= (cfg.trials - 1);
        SeCheckRow row;
        row.t = t;
        row.statistic = name;
        row.empirical = mu;
        row.predicted = pred;
        row.se = std::sqrt(var / cfg.trials);
        row.z = row.se > 0.0 ? (mu - pred) / row.se : 0.0;
        if (std::abs(row.z) > 4.0) rep.flagged = true;
        os << t << ',' << name << ',' << mu << ',' << pred << ',' << row.se << ','
           << row.z << '\n';
        rep.rows.push_back(std::move(row));
    };
    for (int t = 1; t <= cfg.t_max; ++t)
        add_row(t, "mse", t - 1, cfg.delta * sig[t]);
    for (int t = 1; t <= cfg.t_max; ++t) {
        double sprev = std::sqrt(sig[t - 1]);
        double pred =
            threshold_tail_prob(sprev, alpha * sprev, signal) / cfg.delta;
        add_row(t, "onsager", n_mse + t - 1, pred);
    }
    for (int k = 0; k < n_tt; ++k) {
        auto [ta, tb] = cfg.two_time_pairs[k];
        double pred = cfg.delta * (R(ta, ta) - 2.0 * R(ta, tb) + R(tb, tb));
        add_row(ta, "diff_t" + std::to_string(ta) + "_s" + std::to_string(tb),
                n_mse + cfg.t_max + k, pred);
    }
    rep.csv = os.str();
    return rep;
}

}  // namespace ampu
