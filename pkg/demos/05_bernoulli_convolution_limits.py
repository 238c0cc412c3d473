#!/usr/bin/env python3
"""Limit objects: the scaled Bernoulli convolution, CLT, total variation.

For q > 0 the scaled level-n increment sums Z_n/s_n converge to
Z = sqrt(2^{2q}-1) sum 2^{-qm} Y_m, whose law is a scaled infinite
Bernoulli convolution with E[Z^2] = 1.  The limit of the Phi_q-variation
is E|Z|^{1/(1-q)}.  At q = 0 the CLT takes over.  Everything here is
checked two ways: exact sign-pattern enumeration with interval arithmetic
for the truncation, against seeded Monte Carlo.
"""

import math

from phivar import (CoefficientScheme, ConvolutionSpec, clt_distance,
                    coupling_distance, moment_Z, parse_g, sample_Z,
                    sampled_coupling_distance, total_variation_expectation)

print("=== the limit law Z at q = 0.7 ===")
spec = ConvolutionSpec.for_tolerance(0.7)
z = sample_Z(spec, 10 ** 5, seed=3)
print(f"depth {spec.depth} (truncation {spec.truncation_bound():.1e}); "
      f"sample mean {z.mean():+.4f}, sample E[Z^2] = {(z * z).mean():.4f}")

print("\n=== E|Z|^{1/(1-q)}: the variation limit, bracketed exactly ===")
for d in (10, 15, 20):
    est = moment_Z(ConvolutionSpec(0.7, d), 10.0 / 3.0)
    print(f"enum depth {d:2d}: [{est.lo:.6f}, {est.hi:.6f}] "
          f"(width {est.hi - est.lo:.1e})")
mc = moment_Z(spec, 10.0 / 3.0, method="mc", samples=10 ** 6, seed=5)
print(f"monte carlo:   {mc.value:.6f} +- {mc.stderr:.1e}")

print("\n=== coupled distance between Z_n/s_n and Z (shared signs) ===")
pre = CoefficientScheme.prescribed(0.5, parse_g("const:1"))
for n in (5, 10, 20, 30):
    rep = coupling_distance(pre, 0.5, n)
    print(f"n = {n:2d}: exact L2 distance {rep.exact_l2:.3e}")
rep = sampled_coupling_distance(pre, 0.5, 10, p=2.0, samples=10 ** 5, seed=1)
print(f"sampled L2 cross-check at n=10: {rep.sampled_lp:.5f} "
      f"(exact {rep.exact_l2:.5f})")

print("\n=== CLT regime (q = 0): Wasserstein-1 distance to the normal ===")
tak = CoefficientScheme.takagi()
for n in (64, 256, 1024, 4096):
    print(f"n = {n:4d}: W1 = {clt_distance(tak, n):.6f}")
print("(halves when n quadruples: the usual 1/sqrt(n) Berry-Esseen rate)")

print("\n=== total variation = E|Z~| in the convergent regime ===")
for scheme, label, truth in [
    (CoefficientScheme.explicit([1.0, 0.25]), "explicit [1, 1/4]", "1 exactly"),
    (CoefficientScheme.geometric(0.25), "geometric a=1/4 (uniform law)", "1"),
]:
    est = total_variation_expectation(scheme)
    print(f"{label:30s} E|Z~| in [{est.lo:.8f}, {est.hi:.8f}] (truth {truth})")

try:
    total_variation_expectation(tak)
except Exception as exc:
    print(f"takagi: {exc}")
    print("(q=0 with s_n^2 -> infinity: unbounded variation, as it must be)")
