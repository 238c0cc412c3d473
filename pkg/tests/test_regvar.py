import math

import numpy as np
import pytest
from scipy.integrate import quad

from phivar import (GaugeDomainError, PhiFunction, PhivarError,
                    RegularlyVaryingFn, build_ell, parse_g)

SQRT2 = math.sqrt(2.0)


class TestEval:
    def test_constant(self):
        g = RegularlyVaryingFn.constant(1.0)
        assert g.eval(5.0) == 1.0

    def test_power_at_4(self):
        # g(x) = x with index 1
        g = RegularlyVaryingFn.power(1.0)
        assert g.eval(4.0) == 4.0

    def test_shifted_power(self):
        g = RegularlyVaryingFn.shifted_power(2.0)
        assert g.eval(3.0) == 16.0

    def test_power_clamps_below_one(self):
        g = RegularlyVaryingFn.power(2.0)
        assert g.eval(0.25) == g.eval(1.0) == 1.0

    def test_custom_clamp_point(self):
        g = RegularlyVaryingFn.power(1.0, clamp_at=4.0)
        assert g.eval(2.0) == 4.0
        assert g.eval(8.0) == 8.0

    def test_rejects_non_finite(self):
        g = RegularlyVaryingFn.power(1.0)
        with pytest.raises(PhivarError):
            g.eval(float("nan"))
        with pytest.raises(PhivarError):
            g.eval(float("inf"))
        with pytest.raises(PhivarError):
            g.eval(-1.0)

    def test_product_and_index(self):
        g = RegularlyVaryingFn.product(
            RegularlyVaryingFn.constant(2.0),
            RegularlyVaryingFn.shifted_power(1.5),
            RegularlyVaryingFn.log_power(2.0),
        )
        x = 7.0
        assert g.eval(x) == pytest.approx(
            2.0 * (1 + x) ** 1.5 * math.log(math.e + x) ** 2.0, rel=1e-15)
        assert g.index == 1.5

    def test_array_eval(self):
        g = RegularlyVaryingFn.shifted_power(-1.0)
        x = np.array([0.0, 1.0, 3.0])
        np.testing.assert_allclose(g.eval(x), 1.0 / (1.0 + x))


@pytest.mark.parametrize("expr, x, want", [
    ("const:1", 5.0, 1.0),
    ("pow:1", 4.0, 4.0),
    ("spow:2", 3.0, 16.0),
    ("logpow:2", 0.0, 1.0),
    ("mul(const:3,spow:1)", 2.0, 9.0),
    ("mul(pow:1,mul(const:2,spow:1))", 4.0, 40.0),
])
def test_parse_g(expr, x, want):
    assert parse_g(expr).eval(x) == pytest.approx(want, rel=1e-15)


def test_parse_g_rejects_garbage():
    for bad in ("", "pow", "frob:2", "mul()", "pow:abc"):
        with pytest.raises(PhivarError):
            parse_g(bad)


@pytest.mark.parametrize("expr", ["const:2", "pow:1.5", "pow:-1", "spow:2",
                                  "logpow:1", "mul(spow:2,logpow:-1)"])
def test_strict_positivity(expr):
    g = parse_g(expr)
    for x in [0.0, 0.5, 1.0, 7.0, 2.0 ** 20, 2.0 ** 40]:
        assert g.eval(x) > 0.0


class TestRegularVariation:
    """g(lam x)/g(x) -> lam**rho as x grows.

    The 1% bound at x = 2^30 holds for const/pow/spow; log factors converge
    only logarithmically, so for them we assert monotone approach instead.
    """

    FAST = ["const:3", "pow:2", "pow:-0.5", "spow:1.7", "spow:-2"]
    SLOW = ["logpow:1", "logpow:-2", "mul(spow:1,logpow:1)"]

    @pytest.mark.parametrize("expr", FAST)
    @pytest.mark.parametrize("lam", [2.0, 10.0])
    def test_fast_forms_within_1pct(self, expr, lam):
        g = parse_g(expr)
        x = 2.0 ** 30
        assert g.eval(lam * x) / g.eval(x) == pytest.approx(lam ** g.index, rel=0.01)

    @pytest.mark.parametrize("expr", FAST + SLOW)
    @pytest.mark.parametrize("lam", [2.0, 10.0])
    def test_ratio_approaches_limit(self, expr, lam):
        g = parse_g(expr)
        errs = [abs(g.eval(lam * x) / g.eval(x) / lam ** g.index - 1.0)
                for x in (2.0 ** 10, 2.0 ** 20, 2.0 ** 30)]
        assert errs[2] <= errs[1] + 1e-12 <= errs[0] + 2e-12


@pytest.mark.parametrize("expr", ["pow:2", "pow:-1", "spow:3", "spow:-0.5",
                                  "mul(spow:2,const:5)"])
def test_monotone_beyond_clamp(expr):
    g = parse_g(expr)
    xs = 2.0 ** np.arange(1, 31)
    vals = g.eval(xs)
    diffs = np.diff(vals)
    assert np.all(diffs >= 0) or np.all(diffs <= 0)


@pytest.mark.parametrize("expr", ["pow:2", "spow:1.5", "logpow:2",
                                  "mul(spow:2,logpow:1)", "const:4"])
def test_derivative_matches_forward_difference(expr):
    g = parse_g(expr)
    assert g.has_derivative
    for x in [1.0, 3.0, 10.0, 1e3, 1e6]:
        h = 1e-6 * max(1.0, x)
        fd = (g.eval(x + h) - g.eval(x)) / h
        d = g.derivative(x)
        if d == 0.0:
            assert abs(fd) < 1e-12
        else:
            assert fd == pytest.approx(d, rel=1e-5)


def test_ratio_sup_bounds_actual_ratios():
    for expr in ("pow:2", "spow:3", "logpow:2", "mul(spow:2,logpow:1)"):
        g = parse_g(expr)
        for x0 in (0.0, 1.0, 5.0):
            sup = g.ratio_sup(x0)
            xs = x0 + np.arange(0, 50, 0.5)
            assert np.all(g.eval(xs + 1.0) / g.eval(xs) <= sup + 1e-12)


class TestPhiFunction:
    def test_zero_is_exactly_zero(self):
        for q in (0.0, 0.3, 0.9):
            assert PhiFunction(q, parse_g("spow:2")).eval(0.0) == 0.0

    def test_takagi_gauge_at_half(self):
        # Phi_0(x) = x / sqrt(-log2 x); -log2(1/2) = 1
        phi = PhiFunction(0.0, parse_g("pow:1"))
        assert phi.eval(0.5) == pytest.approx(0.5, rel=1e-15)

    def test_takagi_gauge_at_quarter(self):
        # direct formula: 0.25 / sqrt(2)
        phi = PhiFunction(0.0, parse_g("pow:1"))
        assert phi.eval(0.25) == pytest.approx(0.25 / SQRT2, rel=1e-14)

    def test_q_half_unit_g_is_square(self):
        phi = PhiFunction(0.5, parse_g("const:1"))
        assert phi.eval(0.5) == pytest.approx(0.25, rel=1e-15)

    def test_constant_g_closed_form(self):
        # Phi_q = x**(1/(1-q)) * c**(-1/(2(1-q))) exactly
        for q, c in [(0.0, 3.0), (0.25, 0.5), (0.7, 2.0)]:
            phi = PhiFunction(q, RegularlyVaryingFn.constant(c))
            p = 1.0 / (1.0 - q)
            for x in (1e-6, 0.1, 0.5, 0.97):
                assert phi.eval(x) == pytest.approx(
                    x ** p * c ** (-0.5 * p), rel=1e-13)

    def test_positive_on_open_interval(self):
        phi = PhiFunction(0.4, parse_g("mul(spow:2,logpow:1)"))
        xs = np.linspace(1e-9, 1 - 1e-9, 101)
        assert np.all(phi.eval(xs) > 0)

    def test_vanishes_at_zero(self):
        phi = PhiFunction(0.0, parse_g("pow:1"))
        vals = [phi.eval(2.0 ** -k) for k in range(1, 61)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-15

    def test_domain_rejected(self):
        phi = PhiFunction(0.0, parse_g("pow:1"))
        for bad in (-0.1, 1.0, 1.5):
            with pytest.raises(GaugeDomainError):
                phi.eval(bad)

    def test_near_one_is_finite(self):
        # the g clamp avoids any singularity as -log2 x -> 0
        phi = PhiFunction(0.3, parse_g("pow:2"))
        assert math.isfinite(phi.eval(1.0 - 1e-12))

    def test_log_eval_agrees_with_direct(self):
        phi = PhiFunction(0.3, parse_g("spow:2"))
        for x in (1e-8, 1e-3, 0.4, 0.9):
            assert phi.log_eval_from_log2(math.log2(x)) == pytest.approx(
                math.log(phi.eval(x)), rel=1e-12)

    def test_bad_q_rejected(self):
        for q in (-0.1, 1.0, 1.5):
            with pytest.raises(PhivarError):
                PhiFunction(q, parse_g("const:1"))


class TestBuildEll:
    def test_constant_closed_form(self):
        ell = build_ell(parse_g("const:1"), 2.0)
        assert ell.eval(2.0 ** 5) == pytest.approx(5.0, rel=1e-14)
        assert ell.eval(2.0) == pytest.approx(1.0, rel=1e-14)

    def test_scaled_constant(self):
        ell = build_ell(parse_g("const:3"), 10.0)
        assert ell.eval(10.0 ** 4) == pytest.approx(12.0, rel=1e-13)

    def test_logpow_against_quadrature_oracle(self):
        # independent oracle: (1/log b) * int_1^x L(t)/t dt
        L = parse_g("logpow:1")
        b = 2.0
        ell = build_ell(L, b)
        x = 2.0 ** 10
        want, _ = quad(lambda t: L.eval(t) / t, 1.0, x, epsabs=0, epsrel=1e-12,
                       limit=400)
        want /= math.log(b)
        assert ell.eval(x) == pytest.approx(want, rel=1e-8)

    def test_rejects_bad_base(self):
        with pytest.raises(PhivarError):
            build_ell(parse_g("const:1"), 1.0)

    def test_rejects_regularly_varying_L(self):
        with pytest.raises(PhivarError):
            build_ell(parse_g("pow:1"), 2.0)

    def test_output_is_slowly_varying(self):
        # ell(2^n) grows like n (const L) or n^2/2 (log L); both ratios -> 1
        for expr in ("const:1", "logpow:1"):
            ell = build_ell(parse_g(expr), 2.0)
            x = 2.0 ** 400
            assert ell.eval(2.0 * x) / ell.eval(x) == pytest.approx(1.0, rel=0.01)

    def test_positive_everywhere(self):
        ell = build_ell(parse_g("const:1"), 2.0)
        for x in (0.0, 0.5, 1.0, 1.5, 2.0, 100.0):
            assert ell.eval(x) > 0

    def test_derivative(self):
        ell = build_ell(parse_g("logpow:1"), 2.0)
        x = 2.0 ** 8
        h = 1e-6 * x
        fd = (ell.eval(x + h) - ell.eval(x)) / h
        assert fd == pytest.approx(ell.derivative(x), rel=1e-4)
