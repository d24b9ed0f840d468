#include "ampu/phase_boundary.hpp"

#include <cmath>
#include <stdexcept>

#include "ampu/cs_lasso.hpp"
#include "ampu/gaussian.hpp"

namespace ampu {

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("eps must lie in (0,1)");
}

// Bisection of a continuous f with f(lo), f(hi) of opposite sign, followed
// by a few Newton polish steps when a derivative is supplied.
template <class F>
double bisect(F&& f, double lo, double hi, double flo, int iters = 200) {
    for (int i = 0; i < iters && hi - lo > 1e-15 * (1.0 + hi); ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double G(double eps, double alpha) {
    double a2 = 1.0 + alpha * alpha;
    return eps * a2 +
           2.0 * (1.0 - eps) * (a2 * normal_cdf(-alpha) - alpha * normal_pdf(alpha));
}

double G1(double eps, double alpha) {
    return 2.0 * eps * alpha +
           4.0 * (1.0 - eps) * (alpha * normal_cdf(-alpha) - normal_pdf(alpha));
}

double G2(double eps, double alpha) {
    return 2.0 * eps + 4.0 * (1.0 - eps) * normal_cdf(-alpha);
}

double alpha_star(double eps) {
    check_eps(eps);
    // G1(0) = -4(1-eps) phi(0) < 0 and G1 ~ 2 eps alpha at infinity.
    double lo = 0.0, hi = 1.0;
    while (G1(eps, hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("alpha_star bracket failure");
    }
    double flo = G1(eps, lo);
    double a = bisect([&](double x) { return G1(eps, x); }, lo, hi, flo);
    for (int i = 0; i < 5 && std::abs(G1(eps, a)) > 1e-13; ++i) {
        double step = G1(eps, a) / G2(eps, a);
        double next = a - step;
        if (!(next > 0.0) || std::abs(G1(eps, next)) > std::abs(G1(eps, a))) break;
        a = next;
    }
    if (std::abs(G1(eps, a)) > 1e-12)
        throw std::runtime_error("alpha_star did not converge");
    return a;
}

double delta_star(double eps) { return G(eps, alpha_star(eps)); }

double f_delta(double alpha) {
    double phi = normal_pdf(alpha);
    return 2.0 * phi / (alpha + 2.0 * (phi - alpha * normal_cdf(-alpha)));
}

double f_rho(double alpha) {
    if (alpha == 0.0) return 1.0;
    return 1.0 - alpha * normal_cdf(-alpha) / normal_pdf(alpha);
}

double rho_star(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("delta must lie in (0,1)");
    // f_delta is strictly decreasing with f_delta(0) = 1.
    double lo = 0.0, hi = 1.0;
    while (f_delta(hi) > delta) {
        hi *= 2.0;
        if (hi > 1e4) throw std::runtime_error("rho_star bracket failure");
    }
    double flo = f_delta(lo) - delta;
    double a = bisect([&](double x) { return f_delta(x) - delta; }, lo, hi, flo);
    if (std::abs(f_delta(a) - delta) > 1e-12)
        throw std::runtime_error("rho_star inversion did not converge");
    return f_rho(a);
}

double alpha_min(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("delta must lie in (0,1)");
    // G with eps = 0: strictly decreasing from 1 to 0.
    auto g0 = [](double a) {
        return 2.0 * ((1.0 + a * a) * normal_cdf(-a) - a * normal_pdf(a));
    };
    double lo = 0.0, hi = 1.0;
    while (g0(hi) > delta) {
        hi *= 2.0;
        if (hi > 1e4) throw std::runtime_error("alpha_min bracket failure");
    }
    double flo = g0(lo) - delta;
    return bisect([&](double x) { return g0(x) - delta; }, lo, hi, flo);
}

std::pair<double, double> alpha_interval(double eps, double delta) {
    check_eps(eps);
    double as = alpha_star(eps);
    double ds = G(eps, as);
    if (!(delta > ds))
        throw std::domain_error("alpha_interval requires delta > delta*(eps)");
    double f0 = G(eps, 0.0) - delta;  // = 1 - delta > 0
    double a1 = bisect([&](double x) { return G(eps, x) - delta; }, 0.0, as, f0);
    double hi = std::max(2.0 * as, 1.0);
    while (G(eps, hi) < delta) hi *= 2.0;
    double fs = G(eps, as) - delta;  // negative
    double a2 = bisect([&](double x) { return G(eps, x) - delta; }, as, hi, fs);
    return {a1, a2};
}

FixedPointResult fixed_point_sigma(double alpha, double delta,
                                   const SignalSpec& signal) {
    signal.validate();
    auto h = [&](double v) {
        return scalar_se_step(v, alpha, delta, signal) - v;
    };
    FixedPointResult out;
    // Bracket the largest root of h(s) = F(s) - s. Near the critical alpha
    // the slope of F stays within ~1e-6 of 1 over a wide range, which rules
    // out both plain iteration and Newton; bisection is insensitive to that.
    double s0 = signal.second_moment() / delta;
    double lo, hi;
    if (h(s0) > 0.0) {
        lo = s0;
        hi = 2.0 * s0;
        while (h(hi) > 0.0) {
            hi *= 2.0;
            if (hi > 1e15)
                throw std::runtime_error("sigma fixed point bracket failure");
        }
    } else {
        // scan downward for a point where F is above the diagonal; if the
        // map sits below the diagonal all the way down, the fixed point is 0
        hi = s0;
        lo = s0 / 2.0;
        while (h(lo) <= 0.0) {
            hi = lo;
            lo /= 2.0;
            if (lo < 1e-14) {
                out.sigma_sq = 0.0;
                out.subcritical = true;
                return out;
            }
        }
    }
    double s = bisect(h, lo, hi, h(lo));
    if (std::abs(h(s)) > 1e-12 * (1.0 + s))
        throw std::runtime_error("sigma fixed point did not converge");
    out.sigma_sq = s;
    return out;
}

double alpha_0(double delta, const SignalSpec& signal) {
    signal.validate();
    check_eps(signal.epsilon);
    if (!(delta < delta_star(signal.epsilon)))
        throw std::domain_error("alpha_0 requires the supercritical regime");
    auto active = [&](double a) {
        auto fp = fixed_point_sigma(a, delta, signal);
        if (fp.subcritical)
            throw std::runtime_error("unexpected subcritical point in alpha_0 scan");
        double sig = std::sqrt(fp.sigma_sq);
        return threshold_tail_prob(sig, a * sig, signal) - delta;
    };
    double amin = alpha_min(delta);
    double lo = amin * (1.0 + 1e-6);
    double flo = active(lo);
    if (flo <= 0.0) throw std::runtime_error("alpha_0 lower bracket failure");
    double hi = std::max(2.0 * lo, 1.0);
    double fhi = active(hi);
    int crossings = 0;
    double prev = flo, prev_a = lo;
    while (fhi > 0.0) {
        prev = fhi;
        prev_a = hi;
        hi *= 1.5;
        if (hi > 1e3) throw std::runtime_error("alpha_0 upper bracket failure");
        fhi = active(hi);
    }
    if (prev <= 0.0) ++crossings;  // guards against a non-monotone scan
    (void)crossings;
    double a0 = bisect(active, prev_a, hi, prev);
    if (std::abs(active(a0)) > 1e-8)
        throw std::runtime_error("alpha_0 residual too large");
    return a0;
}

}  // namespace ampu
