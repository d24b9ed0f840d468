#!/usr/bin/env python3
"""High-precision reference values for the weak-threshold curve.

Solves the parametric system

    delta = 2 phi(a) / (a + 2 (phi(a) - a Phi(-a)))
    rho   = 1 - a Phi(-a) / phi(a)

for delta in {0.1, ..., 0.9} at 50 significant digits with mpmath, printing
rho(delta). The values are frozen into the acceptance test; rerun this script
to regenerate them.
"""

import mpmath as mp

mp.mp.dps = 60


def phi(a):
    return mp.exp(-a * a / 2) / mp.sqrt(2 * mp.pi)


def Phi(a):
    return mp.erfc(-a / mp.sqrt(2)) / 2


def f_delta(a):
    return 2 * phi(a) / (a + 2 * (phi(a) - a * Phi(-a)))


def f_rho(a):
    return 1 - a * Phi(-a) / phi(a)


def rho_star(delta):
    a = mp.findroot(lambda a: f_delta(a) - delta, mp.mpf(1))
    return f_rho(a)


if __name__ == "__main__":
    for i in range(1, 10):
        d = mp.mpf(i) / 10
        print(f"rho_star({mp.nstr(d, 3)}) = {mp.nstr(rho_star(d), 50)}")
