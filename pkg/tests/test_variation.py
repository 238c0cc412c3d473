import math

import numpy as np
import pytest

from phivar import (CoefficientScheme, GaugeDomainError, PhiFunction,
                    PhivarError, SignField, classify_power_variation,
                    convergence_study, iter_increment_blocks, parse_g,
                    theoretical_limit, variation_binomial, variation_enumerate,
                    variation_mc)
from phivar.variation import SQRT_2_OVER_PI, resolve_threads

TAKAGI = CoefficientScheme.takagi()
GEO = CoefficientScheme.geometric(1.0 / math.sqrt(2.0))
PRE_HALF = CoefficientScheme.prescribed(0.5, parse_g("const:1"))
PHI0 = PhiFunction(0.0, parse_g("pow:1"))
CLASSIC = SignField.classic()


def brute_partial_sum(scheme, signfield, gauge, n, t):
    """Independent oracle: materialize all increments, sum gauge values."""
    incs = np.concatenate(
        [b for _, b in iter_increment_blocks(scheme, signfield, n)])
    if t == 0.0:
        return 0.0
    stop = min(int(math.floor(t * 2 ** n)), 2 ** n - 1) + 1
    x = np.abs(incs[:stop])
    if isinstance(gauge, PhiFunction):
        vals = np.where(x > 0, x, 0.0)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = gauge.eval(x[pos])
        return float(np.sum(out))
    return float(np.sum(x ** float(gauge)))


class TestEnumerate:
    def test_takagi_p1_level2(self):
        assert variation_enumerate(TAKAGI, CLASSIC, 1.0, 2).value == 1.0

    def test_takagi_p2_level2(self):
        assert variation_enumerate(TAKAGI, CLASSIC, 2.0, 2).value == 0.5

    def test_t_zero_is_empty(self):
        for gauge in (1.0, 2.0, PHI0):
            rep = variation_enumerate(TAKAGI, CLASSIC, gauge, 6, 0.0)
            assert rep.value == 0.0

    def test_quadratic_identity_small(self):
        # sum of squared increments telescopes to 2^-n s_n^2 exactly
        rep = variation_enumerate(GEO, CLASSIC, 2.0, 10)
        assert rep.value == pytest.approx(1.0 - 2.0 ** -10, rel=1e-12)

    def test_partial_time_is_prefix_sum(self):
        sf = SignField.random(21)
        for t in (0.25, 1.0 / 3.0, 0.5, 0.999, 1.0):
            got = variation_enumerate(TAKAGI, sf, PHI0, 10, t).value
            want = brute_partial_sum(TAKAGI, sf, PHI0, 10, t)
            assert got == pytest.approx(want, rel=1e-12)

    def test_monotone_in_t(self):
        sf = SignField.random(4)
        vals = [variation_enumerate(PRE_HALF, sf, 2.0, 10, t).value
                for t in np.linspace(0, 1, 17)]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_time_additivity(self):
        # V_{n,1} = V_{n,t} + (sum over the remaining cells), exactly
        sf = SignField.random(13)
        n, t = 10, 0.37
        incs = np.concatenate(
            [b for _, b in iter_increment_blocks(TAKAGI, sf, n)])
        stop = min(int(math.floor(t * 2 ** n)), 2 ** n - 1) + 1
        x = np.abs(incs[stop:])
        rest = float(np.sum(np.where(x > 0, PHI0.eval(np.maximum(x, 1e-300)), 0.0)))
        v1 = variation_enumerate(TAKAGI, sf, PHI0, n, 1.0).value
        vt = variation_enumerate(TAKAGI, sf, PHI0, n, t).value
        assert v1 == pytest.approx(vt + rest, rel=1e-12)

    def test_gauge_domain_guard(self):
        big = CoefficientScheme.explicit([2.0])
        with pytest.raises(GaugeDomainError):
            variation_enumerate(big, CLASSIC, PHI0, 1)
        # power gauges have full domain
        assert variation_enumerate(big, CLASSIC, 1.0, 1).value == 2.0

    def test_threads_agree_exactly(self):
        a = variation_enumerate(TAKAGI, CLASSIC, PHI0, 16, threads=1).value
        b = variation_enumerate(TAKAGI, CLASSIC, PHI0, 16, threads=2).value
        assert a == b

    def test_report_fields(self):
        rep = variation_enumerate(TAKAGI, CLASSIC, PHI0, 8)
        assert rep.n == 8 and rep.t == 1.0 and rep.mode == "enumerate"
        assert rep.stderr == 0.0 and rep.wall_time >= 0.0


class TestBinomial:
    def test_takagi_p1_level2(self):
        # weights (1,2,1)/4, |n-2j| values (2,0,2), 2^-2 scale, times 2^2
        assert variation_binomial(TAKAGI, 1.0, 2).value == pytest.approx(1.0, rel=1e-14)

    def test_matches_enumerate(self):
        for gauge in (1.0, 2.0, PHI0):
            for n in (4, 10, 16):
                b = variation_binomial(TAKAGI, gauge, n).value
                e = variation_enumerate(TAKAGI, CLASSIC, gauge, n).value
                assert b == pytest.approx(e, rel=1e-12)

    def test_geometric_half_qualifies(self):
        # a = 1/2 gives beta_m = 1: the equal-prefix fast path applies
        g = CoefficientScheme.geometric(0.5)
        b = variation_binomial(g, 2.0, 12).value
        e = variation_enumerate(g, CLASSIC, 2.0, 12).value
        assert b == pytest.approx(e, rel=1e-12)

    def test_large_n_stable(self):
        v = variation_binomial(TAKAGI, PHI0, 10 ** 5).value
        assert abs(v - SQRT_2_OVER_PI) < 1e-3

    def test_log_space_path_matches_direct(self, monkeypatch):
        # force the log-space form at a level the direct form also handles
        import phivar.variation as vmod
        direct = variation_binomial(TAKAGI, PHI0, 400).value
        monkeypatch.setattr(vmod, "_BINOMIAL_DIRECT_MAX_N", 0)
        logspace = variation_binomial(TAKAGI, PHI0, 400).value
        assert logspace == pytest.approx(direct, rel=1e-12)

    def test_unequal_prefix_rejected(self):
        with pytest.raises(PhivarError):
            variation_binomial(GEO, 2.0, 8)

    def test_partial_time_rejected(self):
        with pytest.raises(PhivarError):
            variation_binomial(TAKAGI, 2.0, 8, t=0.5)


class TestMonteCarlo:
    def test_deterministic(self):
        a = variation_mc(TAKAGI, CLASSIC, PHI0, 12, 1.0, 10 ** 4, seed=5)
        b = variation_mc(TAKAGI, CLASSIC, PHI0, 12, 1.0, 10 ** 4, seed=5)
        assert a.value == b.value and a.stderr == b.stderr

    def test_t_zero(self):
        rep = variation_mc(TAKAGI, CLASSIC, PHI0, 12, 0.0, 10 ** 3, seed=1)
        assert rep.value == 0.0 and rep.stderr == 0.0

    def test_within_four_stderr_of_enumerate(self):
        e = variation_enumerate(TAKAGI, CLASSIC, PHI0, 16).value
        rep = variation_mc(TAKAGI, CLASSIC, PHI0, 16, 1.0, 10 ** 5, seed=2)
        assert abs(rep.value - e) <= 4 * rep.stderr

    def test_unbiased_over_seeds(self):
        # mean over 20 independent seeds within 3 pooled stderr of exact
        n, samples = 12, 10 ** 4
        exact = variation_enumerate(TAKAGI, CLASSIC, PHI0, n).value
        reps = [variation_mc(TAKAGI, CLASSIC, PHI0, n, 1.0, samples, seed=s)
                for s in range(20)]
        mean = np.mean([r.value for r in reps])
        pooled = math.sqrt(np.mean([r.stderr ** 2 for r in reps]) / len(reps))
        assert abs(mean - exact) <= 3 * pooled

    def test_sample_floor(self):
        with pytest.raises(PhivarError):
            variation_mc(TAKAGI, CLASSIC, PHI0, 8, 1.0, 99, seed=0)

    def test_random_signs(self):
        sf = SignField.random(42)
        e = brute_partial_sum(TAKAGI, sf, PHI0, 12, 1.0)
        rep = variation_mc(TAKAGI, sf, PHI0, 12, 1.0, 10 ** 5, seed=3)
        assert abs(rep.value - e) <= 4 * rep.stderr


class TestStudy:
    def test_takagi_phi0_deviations_shrink(self):
        study = convergence_study(TAKAGI, CLASSIC, PHI0,
                                  [2 ** e for e in range(4, 15)],
                                  mode="binomial")
        assert study.limit == pytest.approx(SQRT_2_OVER_PI, rel=1e-12)
        devs = [abs(r.deviation) for r in study.reports]
        assert all(b < a for a, b in zip(devs[-5:], devs[-4:]))

    def test_prescribed_quadratic_rows(self):
        study = convergence_study(PRE_HALF, CLASSIC, 2.0, [4, 8, 12, 16, 20],
                                  mode="enumerate")
        assert study.limit == pytest.approx(1.0, abs=1e-4)
        for rep in study.reports:
            assert rep.value == pytest.approx(1.0 - 2.0 ** -rep.n, rel=1e-11)

    def test_phi_half_partial_time(self):
        study = convergence_study(PRE_HALF, CLASSIC,
                                  PhiFunction(0.5, parse_g("const:1")),
                                  [20], t=0.5, mode="enumerate")
        # limit t * E|Z|^2 = 1/2; the level-20 value is already within 1e-4
        assert study.limit == pytest.approx(0.5, abs=1e-4)
        assert study.reports[0].value == pytest.approx(0.5, abs=1e-4)

    def test_auto_mode_picks_binomial_for_takagi(self):
        study = convergence_study(TAKAGI, CLASSIC, PHI0, [12], mode="auto")
        assert study.reports[0].mode == "binomial"


class TestTheoreticalLimit:
    def test_takagi_phi0(self):
        assert theoretical_limit(TAKAGI, PHI0, 1.0) == pytest.approx(
            SQRT_2_OVER_PI, rel=1e-12)

    def test_scaling_in_t(self):
        assert theoretical_limit(TAKAGI, PHI0, 0.25) == pytest.approx(
            SQRT_2_OVER_PI / 4.0, rel=1e-12)

    def test_power_gauge_needs_constant_g(self):
        assert theoretical_limit(TAKAGI, 1.0, 1.0) is None

    def test_prescribed_power_gauge(self):
        assert theoretical_limit(PRE_HALF, 2.0, 1.0) == pytest.approx(1.0, abs=1e-4)

    def test_geometric_profile(self):
        # geometric a=1/sqrt2 has q=1/2, g = 1/((2a)^2-1) = 1
        assert theoretical_limit(GEO, 2.0, 1.0) == pytest.approx(1.0, abs=1e-4)

    def test_mismatched_phi_q(self):
        assert theoretical_limit(PRE_HALF, PhiFunction(0.3, parse_g("const:1")),
                                 1.0) is None

    def test_explicit_has_no_profile(self):
        assert theoretical_limit(CoefficientScheme.explicit([1.0]), 2.0, 1.0) is None


class TestClassify:
    def test_takagi_r2_vanishing(self):
        res = classify_power_variation(TAKAGI, 2.0, range(8, 17))
        assert res.verdict == "vanishing"
        for rep in res.reports:
            assert rep.value == pytest.approx(rep.n * 2.0 ** -rep.n, rel=1e-12)

    def test_geometric_r1_diverging(self):
        res = classify_power_variation(GEO, 1.0, range(8, 17))
        assert res.verdict == "diverging"

    def test_geometric_r2_stable(self):
        res = classify_power_variation(GEO, 2.0, range(8, 17))
        assert res.verdict == "stable"
        for rep in res.reports:
            assert rep.value == pytest.approx(1.0 - 2.0 ** -rep.n, rel=1e-11)

    def test_khintchine_band(self):
        for scheme in (TAKAGI, GEO):
            for r in (1.0, 2.0, 10.0 / 3.0):
                res = classify_power_variation(scheme, r, [8, 12, 16])
                vals = [v for _, v in res.khintchine_ratios]
                assert max(vals) / min(vals) < 3.0

    def test_r_below_one_rejected(self):
        with pytest.raises(PhivarError):
            classify_power_variation(TAKAGI, 0.5, range(8, 12))


def test_resolve_threads_env(monkeypatch):
    monkeypatch.setenv("PHIVAR_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv("PHIVAR_THREADS", "junk")
    with pytest.raises(PhivarError):
        resolve_threads(None)
