#!/usr/bin/env python3
"""Variation sums by three engines, converging to their limits.

The classical Takagi function has vanishing quadratic variation and
infinite total variation, yet its Phi_0-variation with
Phi_0(x) = x / sqrt(-log2 x) is exactly sqrt(2/pi) * t.  The binomial
fast path (equal coefficients collapse onto a binomial law) makes the
partial sums computable at levels far beyond enumeration, and Monte
Carlo covers everything else.
"""

import math

from phivar import (CoefficientScheme, PhiFunction, SignField,
                    classify_power_variation, convergence_study, parse_g,
                    variation_binomial, variation_enumerate, variation_mc)

TAK = CoefficientScheme.takagi()
PHI0 = PhiFunction(0.0, parse_g("pow:1"))
LIMIT = math.sqrt(2.0 / math.pi)

print("=== three engines, one number (takagi, Phi_0, n=16) ===")
b = variation_binomial(TAK, PHI0, 16)
e = variation_enumerate(TAK, SignField.classic(), PHI0, 16)
m = variation_mc(TAK, SignField.classic(), PHI0, 16, 1.0, 10 ** 5, seed=1)
print(f"binomial   {b.value:.12f}   ({b.wall_time * 1e3:7.2f} ms)")
print(f"enumerate  {e.value:.12f}   ({e.wall_time * 1e3:7.2f} ms)")
print(f"monte carlo {m.value:.10f} +- {m.stderr:.2e} ({m.wall_time * 1e3:7.2f} ms)")

print(f"\n=== convergence toward sqrt(2/pi) = {LIMIT:.10f} ===")
study = convergence_study(TAK, None, PHI0, [2 ** k for k in range(4, 15)],
                          mode="binomial")
for rep in study.reports:
    print(f"n = {rep.n:6d}: V_n = {rep.value:.8f}   deviation {rep.deviation:+.2e}")

print("\n=== prescribed quadratic variation: V_n^(2) = 1 - 2^-n exactly ===")
pre = CoefficientScheme.prescribed(0.5, parse_g("const:1"))
study = convergence_study(pre, None, 2.0, [4, 8, 12, 16, 20], mode="enumerate")
for rep in study.reports:
    print(f"n = {rep.n:2d}: V_n^(2) = {rep.value:.12f} "
          f"(limit {study.limit:.6f}, deviation {rep.deviation:+.2e})")

print("\n=== power-variation classification ===")
for scheme, r, label in [
    (TAK, 2.0, "takagi, r=2"),
    (CoefficientScheme.geometric(1 / math.sqrt(2)), 1.0, "geometric 1/sqrt2, r=1"),
    (CoefficientScheme.geometric(1 / math.sqrt(2)), 2.0, "geometric 1/sqrt2, r=2"),
]:
    res = classify_power_variation(scheme, r, range(8, 21))
    print(f"{label:26s} -> {res.verdict:9s} (log2-slope {res.slope:+.3f}/level)")
