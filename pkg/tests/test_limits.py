import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from phivar import (CapExceededError, CoefficientScheme, ConvolutionSpec,
                    PhivarError, clt_distance, coupling_distance, moment_Z,
                    parse_g, sample_Z, sampled_coupling_distance,
                    total_variation_expectation, variation_enumerate,
                    w1_to_normal)

PRE_HALF = CoefficientScheme.prescribed(0.5, parse_g("const:1"))
TAKAGI = CoefficientScheme.takagi()


class TestConvolutionSpec:
    @pytest.mark.parametrize("q", [0.1, 0.5, 0.7, 0.9])
    def test_unit_second_moment_identity(self, q):
        # lam^2 sum_{m>=1} 2^{-2qm} telescopes to 1
        spec = ConvolutionSpec(q=q, depth=1)
        lam2 = spec.lam ** 2
        total = lam2 * 2.0 ** (-2 * q) / (1.0 - 2.0 ** (-2 * q))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_truncation_bound_dominates_tail(self):
        spec = ConvolutionSpec(q=0.5, depth=12)
        direct = spec.lam * math.fsum(2.0 ** (-0.5 * m) for m in range(13, 600))
        # closed form equals the infinite sum; allow 1 ulp of float wobble
        assert spec.truncation_bound() >= direct * (1.0 - 1e-14)
        assert spec.truncation_bound() <= direct * 1.0001

    def test_for_tolerance(self):
        spec = ConvolutionSpec.for_tolerance(0.5, 1e-9)
        assert spec.truncation_bound() <= 1e-9
        assert ConvolutionSpec(0.5, spec.depth - 1).truncation_bound() > 1e-9

    def test_rejects_bad_parameters(self):
        with pytest.raises(PhivarError):
            ConvolutionSpec(q=0.0, depth=10)
        with pytest.raises(PhivarError):
            ConvolutionSpec(q=0.5, depth=0)


class TestSampleZ:
    # at q = 1/2 the 1e-9 truncation precondition needs depth >= 62
    def test_seed_determinism(self):
        spec = ConvolutionSpec.for_tolerance(0.5)
        np.testing.assert_array_equal(sample_Z(spec, 1000, seed=3),
                                      sample_Z(spec, 1000, seed=3))

    def test_mean_and_second_moment(self):
        spec = ConvolutionSpec.for_tolerance(0.5)
        z = sample_Z(spec, 10 ** 6, seed=7)
        assert abs(z.mean()) <= 4.0 * z.std() / math.sqrt(len(z))
        m2 = z * z
        assert abs(m2.mean() - 1.0) <= 4.0 * m2.std(ddof=1) / math.sqrt(len(z))

    def test_depth_precondition(self):
        with pytest.raises(PhivarError):
            sample_Z(ConvolutionSpec(q=0.5, depth=40), 100, seed=0)


class TestMomentZ:
    def test_unit_variance_interval(self):
        est = moment_Z(ConvolutionSpec(0.5, 20), 2.0)
        assert est.lo <= 1.0 <= est.hi
        assert est.hi - est.lo < 1e-2

    def test_mc_agrees_with_identity(self):
        est = moment_Z(ConvolutionSpec.for_tolerance(0.5), 2.0, method="mc",
                       samples=10 ** 6, seed=11)
        assert abs(est.value - 1.0) <= 4 * est.stderr

    @pytest.mark.parametrize("r", [1.0, 2.0, 10.0 / 3.0])
    def test_intervals_nest_and_shrink(self, r):
        prev = None
        for d in (10, 15, 20):
            est = moment_Z(ConvolutionSpec(0.5, d), r)
            if prev is not None:
                assert est.lo >= prev.lo - 1e-15
                assert est.hi <= prev.hi + 1e-15
                assert est.hi - est.lo < prev.hi - prev.lo
            prev = est

    def test_cross_oracle_overlap(self):
        # q = 0.7, r = 1/(1-q): MC confidence interval overlaps the exact
        # enumeration interval
        q, r = 0.7, 10.0 / 3.0
        enum = moment_Z(ConvolutionSpec(q, 20), r)
        mc = moment_Z(ConvolutionSpec(q, 60), r, method="mc",
                      samples=10 ** 5, seed=13)
        assert mc.lo <= enum.hi and enum.lo <= mc.hi

    def test_depth_cap(self):
        with pytest.raises(CapExceededError):
            moment_Z(ConvolutionSpec(0.5, 26), 2.0)

    def test_bad_order(self):
        with pytest.raises(PhivarError):
            moment_Z(ConvolutionSpec(0.5, 10), 0.5)


class TestCoupling:
    def test_closed_form_at_n10(self):
        # independent oracle: head term ((1-2^-10)^{-1/2}-1)^2 (1-2^-10),
        # tail 2^-10
        w = 1.0 - 2.0 ** -10
        want = math.sqrt((w ** -0.5 - 1.0) ** 2 * w + 2.0 ** -10)
        rep = coupling_distance(PRE_HALF, 0.5, 10)
        assert rep.exact_l2 == pytest.approx(want, rel=1e-12)

    def test_level_one_formula(self):
        q = 0.5
        lam = math.sqrt(2.0 ** (2 * q) - 1.0)
        want = math.sqrt((1.0 - lam * 2.0 ** -q) ** 2 + 2.0 ** (-2 * q))
        rep = coupling_distance(PRE_HALF, q, 1)
        assert rep.exact_l2 == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
    def test_decreasing_to_zero(self, q):
        # the distance is dominated by the tail 2^{-qn}, so the level at
        # which it crosses 1e-4 depends on q (n = 30 suffices for q >= 1/2)
        scheme = CoefficientScheme.prescribed(q, parse_g("const:1"))
        vals = [coupling_distance(scheme, q, n).exact_l2
                for n in (5, 10, 20, 30)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        n_small = math.ceil(math.log2(1e4) / q) + 1
        assert coupling_distance(scheme, q, n_small).exact_l2 < 1e-4

    def test_negative_beta_rejected(self):
        with pytest.raises(PhivarError):
            coupling_distance(CoefficientScheme.geometric(-0.4), 0.5, 5)

    def test_sampled_cross_check(self):
        rep = sampled_coupling_distance(PRE_HALF, 0.5, 10, p=2.0,
                                        samples=10 ** 5, seed=5)
        # the sampled L2 distance estimates the same quantity
        assert rep.sampled_lp == pytest.approx(rep.exact_l2, rel=0.05)

    def test_sampled_seed_determinism(self):
        a = sampled_coupling_distance(PRE_HALF, 0.5, 8, 2.0, 10 ** 4, seed=9)
        b = sampled_coupling_distance(PRE_HALF, 0.5, 8, 2.0, 10 ** 4, seed=9)
        assert a.sampled_lp == b.sampled_lp


def quad_w1_oracle(atoms, probs):
    """Independent quadrature of |F - Phi| over a wide window."""
    atoms = np.asarray(atoms, dtype=float)
    probs = np.asarray(probs, dtype=float)
    order = np.argsort(atoms)
    atoms, probs = atoms[order], probs[order]

    def F(x):
        return probs[atoms <= x].sum()

    val, _ = quad(lambda x: abs(F(x) - ndtr(x)), -12, 12, limit=800,
                  points=list(atoms))
    return val


class TestW1:
    def test_pm_one_against_quadrature(self):
        impl = w1_to_normal(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        want = quad_w1_oracle([-1.0, 1.0], [0.5, 0.5])
        assert impl == pytest.approx(want, abs=1e-7)

    def test_binomial_law_against_quadrature(self):
        n = 16
        j = np.arange(n + 1)
        atoms = (n - 2.0 * j) / math.sqrt(n)
        probs = np.array([math.comb(n, int(jj)) for jj in j]) / 2.0 ** n
        impl = w1_to_normal(atoms, probs)
        want = quad_w1_oracle(atoms, probs)
        assert impl == pytest.approx(want, abs=1e-6)

    def test_takagi_frozen_value(self):
        # frozen from an independent segment-integration oracle
        assert clt_distance(TAKAGI, 64) == pytest.approx(0.0625695551097,
                                                         abs=1e-9)

    def test_takagi_strictly_decreasing(self):
        vals = [clt_distance(TAKAGI, n) for n in (64, 256, 1024, 4096)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= 0.02

    def test_rate_is_square_root(self):
        for n in (256, 1024):
            ratio = clt_distance(TAKAGI, 4 * n) / clt_distance(TAKAGI, n)
            assert 0.4 <= ratio <= 0.6

    def test_degenerate_pm_one(self):
        val = clt_distance(CoefficientScheme.explicit([0.7]), 1)
        want = quad_w1_oracle([-1.0, 1.0], [0.5, 0.5])
        assert val == pytest.approx(want, abs=1e-7)

    def test_mc_path_for_unequal_coefficients(self):
        # explicit [1, 1/4]: Z_2/s_2 takes 4 values; empirical law from the
        # seeded sampler must land near the exact W1
        scheme = CoefficientScheme.explicit([1.0, 0.25])
        s = math.sqrt(scheme.s_squared(2))
        atoms = np.array([(1 + 0.5) / s, (1 - 0.5) / s, (-1 + 0.5) / s,
                          (-1 - 0.5) / s])
        exact = w1_to_normal(atoms, np.full(4, 0.25))
        approx_val = clt_distance(scheme, 2, samples=10 ** 5, seed=3)
        assert approx_val == pytest.approx(exact, abs=0.01)


class TestTotalVariation:
    def test_single_coefficient(self):
        est = total_variation_expectation(CoefficientScheme.explicit([0.7]))
        assert est.value == pytest.approx(0.7) and est.lo == est.hi == est.value

    def test_two_coefficients_exact_one(self):
        est = total_variation_expectation(CoefficientScheme.explicit([1.0, 0.25]))
        assert est.value == 1.0 and est.lo == 1.0 and est.hi == 1.0

    def test_geometric_quarter(self):
        # Z~ = sum 2^-m Y_{m+1} is uniform on [-2, 2]: E|Z~| = 1
        est = total_variation_expectation(CoefficientScheme.geometric(0.25))
        assert est.lo <= 1.0 <= est.hi
        assert est.hi - est.lo < 1e-4

    def test_matches_first_variation(self):
        est = total_variation_expectation(CoefficientScheme.geometric(0.25))
        v = variation_enumerate(CoefficientScheme.geometric(0.25), None, 1.0, 20)
        assert v.value == pytest.approx(est.value, abs=1e-3)

    def test_mc_method(self):
        est = total_variation_expectation(CoefficientScheme.geometric(0.25),
                                          method="mc", samples=10 ** 5, seed=1)
        assert est.lo <= 1.0 <= est.hi

    def test_divergent_regime_rejected(self):
        with pytest.raises(PhivarError):
            total_variation_expectation(TAKAGI)
        with pytest.raises(PhivarError):
            total_variation_expectation(CoefficientScheme.geometric(0.6))
