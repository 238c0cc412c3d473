#!/usr/bin/env python3
"""Gauge functions: regularly varying g and the variation gauge Phi_q.

A power gauge x**p is the wrong yardstick for many fractal paths.  The
right one multiplies x**(1/(1-q)) by a slowly adjusting correction built
from a regularly varying g:

    Phi_q(x) = x**(1/(1-q)) * g(-log2(x)/(1-q))**(-1/(2(1-q)))

This script shows the parametric g family, the regular-variation ratio
test, the gauge for the classical Takagi function (q=0, g(x)=x), and the
integrated slowly varying scale ell used by the growth conditions.
"""

import numpy as np

from phivar import PhiFunction, build_ell, parse_g

print("=== regularly varying forms ===")
for expr in ("const:2", "pow:1", "spow:-2", "logpow:1", "mul(spow:2,logpow:1)"):
    g = parse_g(expr)
    print(f"{expr:24s} index {g.index:+.1f}   g(10) = {g.eval(10.0):.6g}")

print("\n=== the defining ratio g(lam*x)/g(x) -> lam^rho ===")
g = parse_g("spow:2")
for x in (2.0 ** 10, 2.0 ** 20, 2.0 ** 30):
    ratio = g.eval(2.0 * x) / g.eval(x)
    print(f"x = 2^{int(np.log2(x)):2d}: ratio {ratio:.8f} (target {2.0 ** g.index})")

print("\n=== Phi_0 for the classical Takagi function: x / sqrt(-log2 x) ===")
phi = PhiFunction(0.0, parse_g("pow:1"))
for x in (0.5, 0.25, 2.0 ** -10, 2.0 ** -30):
    print(f"Phi_0({x:.2e}) = {phi.eval(x):.6e}")

print("\n=== constant g collapses Phi_q to a pure power ===")
phi_half = PhiFunction(0.5, parse_g("const:1"))
xs = np.array([0.9, 0.5, 0.1, 0.001])
print("Phi_1/2(x): ", phi_half.eval(xs))
print("x^2:        ", xs ** 2)

print("\n=== integrated slowly varying scale: ell(b^n) = int_0^n L(b^s) ds ===")
ell = build_ell(parse_g("const:1"), 2.0)
print("L = 1, b = 2:", [ell.eval(2.0 ** n) for n in (1, 5, 10)], "(= n)")
ell_log = build_ell(parse_g("logpow:1"), 2.0)
print("L = log(e+x), b = 2: ell(2^10) =", f"{ell_log.eval(2.0 ** 10):.6f}",
      "(grows like n^2 log2/2)")
