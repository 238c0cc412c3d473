#!/usr/bin/env python3
"""Coefficient schemes and their growth exponents.

The roughness of f(t) = sum alpha_m phi(2^m t) is governed by
s_n^2 = sum_{m<n} (2^m alpha_m)^2.  The exponent q_n = (1/n) log2 s_n
pins the critical power p = 1/(1-q): below it power variation blows up,
above it power variation vanishes.  This script surveys the built-in
schemes, including the factorial-gap scheme whose exponents oscillate so
wildly that no power p works at all, and checks the growth conditions
that plug a scheme into the limit theorems.
"""

import math

from phivar import (CoefficientScheme, check_conditions, critical_exponents,
                    parse_g)

schemes = {
    "takagi (alpha = 2^-m)": CoefficientScheme.takagi(),
    "geometric a=1/sqrt(2)": CoefficientScheme.geometric(1 / math.sqrt(2)),
    "geometric a=1/4 (bounded variation)": CoefficientScheme.geometric(0.25),
    "prescribed q=0.7, g=(1+x)^2": CoefficientScheme.prescribed(
        0.7, parse_g("spow:2"), max_level=256),
}

print("=== s_n^2 growth ===")
for name, s in schemes.items():
    vals = ", ".join(f"{s.s_squared(n):.4g}" for n in (1, 4, 8, 16))
    print(f"{name:38s} s_n^2 at n=1,4,8,16: {vals}")

print("\n=== critical exponents ===")
for name, s in schemes.items():
    rep = critical_exponents(s, range(1, 65))
    p = f"{rep.p_critical:.3f}" if rep.p_critical else "undefined"
    print(f"{name:38s} q_n -> {rep.q_last:+.3f}   p-critical {p}")

print("\n=== factorial-gap scheme: exponents that never settle ===")
fab = CoefficientScheme.faber()
rep = critical_exponents(fab, range(2, 721))
print(f"q_n over [2, 720]: min {rep.q_low:+.3f}, max {rep.q_high:+.3f}")
print(f"at p = {rep.p_critical:.3f}: vanishing-liminf regime expected: "
      f"{rep.liminf_zero_expected}, infinite-limsup regime expected: "
      f"{rep.limsup_infinite_expected}")
print("(both at once: no power variation can be finite and nontrivial)")

print("\n=== growth-condition report: geometric a=1/sqrt(2) at q = 1/2 ===")
geo = CoefficientScheme.geometric(1 / math.sqrt(2))
rep = check_conditions(geo, 0.5, 2.0, range(1, 61), ell=parse_g("const:1"))
print("verdicts:", rep.verdicts)
print("last s-ratio:", f"{rep.ratios_s[-1][1]:.10f}",
      "(target (2^{2q}-1)^{-1} = 1)")
print(f"s_(n-1)^2/s_n^2 -> {rep.ratio_last:.6f} (2^-2q = {rep.ratio_target})")

print("\n=== truncation control ===")
tak = CoefficientScheme.takagi()
for M in (10, 20, 40):
    print(f"uniform error of truncating takagi at level {M}: "
          f"{tak.tail_bound(M):.3e}")
