#pragma once

#include <utility>

#include "ampu/ensembles.hpp"

namespace ampu {

// G_eps(alpha) = eps (1+alpha^2) + 2(1-eps)[(1+alpha^2) Phi(-alpha)
// - alpha phi(alpha)] and its first two alpha-derivatives. The minimum of G
// over alpha encodes the l1 phase boundary in (eps, delta) coordinates.
double G(double eps, double alpha);
double G1(double eps, double alpha);
double G2(double eps, double alpha);

// Unique positive minimizer of G_eps; |G1| <= 1e-12 at the returned point.
double alpha_star(double eps);

// delta*(eps) = G_eps(alpha_star(eps)), the critical measurement rate.
double delta_star(double eps);

// Parametric weak-threshold curve: delta = f_delta(alpha),
// rho = f_rho(alpha), alpha > 0.
double f_delta(double alpha);
double f_rho(double alpha);

// rho*(delta): invert f_delta (strictly decreasing) and evaluate f_rho.
double rho_star(double delta);

// alpha_min(delta): the threshold below which the SE map grows faster than
// sigma^2 at infinity; root of 2[(1+a^2) Phi(-a) - a phi(a)] = delta.
double alpha_min(double delta);

// Roots alpha_1 < alpha_2 of G_eps(alpha) = delta; the open interval where
// the scalar SE contraction rate G_eps(alpha)/delta is below 1. Requires
// delta > delta*(eps).
std::pair<double, double> alpha_interval(double eps, double delta);

struct FixedPointResult {
    double sigma_sq = 0.0;
    bool subcritical = false;  // iteration collapsed to 0
};

// Largest fixed point of the scalar SE map, reached by damped iteration
// from sigma_0^2 = E{X^2}/delta; residual |F(s) - s| <= 1e-12 when
// sigma_sq > 0.
FixedPointResult fixed_point_sigma(double alpha, double delta,
                                   const SignalSpec& signal);

// alpha_0(delta, p_X): the threshold at which the active fraction at the SE
// fixed point equals delta, i.e. P{|X + sigma* Z| >= alpha sigma*} = delta.
// Requires the supercritical regime delta < delta*(eps).
double alpha_0(double delta, const SignalSpec& signal);

}  // namespace ampu
