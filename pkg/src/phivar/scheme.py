"""Coefficient schemes for Takagi-class expansions.

A scheme supplies the coefficients alpha_m of f(t) = sum_m alpha_m phi(2^m t)
together with the derived quantities used everywhere else:

    beta_m = 2^m * alpha_m
    s_n^2  = sum_{m<n} beta_m^2       (variance of the level-n increment sum)
    q_n    = (1/n) log2 s_n           (growth exponent)

Built-in kinds:

    takagi          alpha_m = 2^-m                  (s_n^2 = n)
    geometric(a)    alpha_m = a^m, |a| < 1          (s_n^2 geometric in (2a)^2)
    explicit(list)  alpha_m from a finite list
    faber           alpha_m = 10^-j at m = j!, truncated at a max level
    prescribed(q,g) alpha_m = 2^{-m(1-q)} sqrt((2^{2q}-1) g(m)), q > 0
    prescribed_q0(g) alpha_m = 2^-m sqrt(g'(m)), for g with derivative

The two prescribed kinds are coefficient recipes that make the Phi_q- (resp.
Phi_0-) variation of the resulting function linear in t; see the variation
and limits modules for the checks.

Note on the s_{n-1}^2/s_n^2 ratio reported by check_conditions: under any of
the four growth conditions the ratio converges to 2^{-2q} (the geometric
a = 1/sqrt(2) scheme gives (2^{n-1}-1)/(2^n-1) -> 1/2 at q = 1/2, and the
q = 0 CLT regime needs ratio -> 1).  ConditionReport compares against
2^{-2q}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import PhivarError
from .regvar import RegularlyVaryingFn, build_ell

_KINDS = ("takagi", "geometric", "explicit", "faber", "prescribed-q", "prescribed-q0")


def _factorials_upto(limit: int):
    out, j, f = [], 1, 1
    while f <= limit:
        out.append((j, f))
        j += 1
        f *= j
    return out


@dataclass(frozen=True)
class CoefficientScheme:
    """Immutable coefficient sequence; safe for concurrent reads."""

    kind: str
    a: float = 0.0
    q: float = 0.0
    g: Optional[RegularlyVaryingFn] = None
    alphas: tuple = field(default_factory=tuple)
    max_level: int = 256

    # -- constructors ------------------------------------------------------

    @staticmethod
    def takagi(max_level: int = 256) -> "CoefficientScheme":
        return CoefficientScheme("takagi", max_level=max_level)

    @staticmethod
    def geometric(a: float, max_level: int = 256) -> "CoefficientScheme":
        if not abs(a) < 1:
            raise PhivarError(f"geometric ratio must satisfy |a| < 1, got {a}")
        return CoefficientScheme("geometric", a=a, max_level=max_level)

    @staticmethod
    def explicit(alphas: Sequence[float]) -> "CoefficientScheme":
        alphas = tuple(float(x) for x in alphas)
        return CoefficientScheme("explicit", alphas=alphas,
                                 max_level=max(len(alphas), 1))

    @staticmethod
    def faber(max_level: int = 720) -> "CoefficientScheme":
        return CoefficientScheme("faber", max_level=max_level)

    @staticmethod
    def prescribed(q: float, g: RegularlyVaryingFn,
                   max_level: int = 256) -> "CoefficientScheme":
        if not 0 < q < 1:
            raise PhivarError(f"prescribed-q requires 0 < q < 1, got {q}")
        return CoefficientScheme("prescribed-q", q=q, g=g, max_level=max_level)

    @staticmethod
    def prescribed_q0(g: RegularlyVaryingFn,
                      max_level: int = 256) -> "CoefficientScheme":
        if not g.has_derivative:
            raise PhivarError("prescribed-q0 requires g with an available derivative")
        return CoefficientScheme("prescribed-q0", g=g, max_level=max_level)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise PhivarError(f"unknown scheme kind {self.kind!r}")
        if self.max_level < 1:
            raise PhivarError("max_level must be positive")

    # -- coefficients ------------------------------------------------------

    def alpha(self, m: int) -> float:
        """alpha_m."""
        if m < 0:
            raise PhivarError("coefficient index must be nonnegative")
        if self.kind == "takagi":
            return 2.0 ** -m
        if self.kind == "geometric":
            return self.a ** m
        if self.kind == "explicit":
            return self.alphas[m] if m < len(self.alphas) else 0.0
        if self.kind == "faber":
            if m == 0 or m > self.max_level:
                return 0.0
            for j, f in _factorials_upto(self.max_level):
                if f == m:
                    return 10.0 ** -j
            return 0.0
        if self.kind == "prescribed-q":
            lam2 = 2.0 ** (2 * self.q) - 1.0
            return 2.0 ** (-m * (1 - self.q)) * math.sqrt(lam2 * self.g.eval(float(m)))
        # prescribed-q0
        gp = self.g.derivative(float(m))
        if gp < 0:
            raise PhivarError("prescribed-q0 requires g' >= 0 at integer points")
        return 2.0 ** -m * math.sqrt(gp)

    def beta(self, m: int) -> float:
        """beta_m = 2^m * alpha_m, computed without forming 2^m * 2^-m."""
        if m < 0:
            raise PhivarError("coefficient index must be nonnegative")
        if self.kind == "takagi":
            return 1.0
        if self.kind == "geometric":
            return (2.0 * self.a) ** m
        if self.kind == "prescribed-q":
            lam2 = 2.0 ** (2 * self.q) - 1.0
            return 2.0 ** (self.q * m) * math.sqrt(lam2 * self.g.eval(float(m)))
        if self.kind == "prescribed-q0":
            gp = self.g.derivative(float(m))
            if gp < 0:
                raise PhivarError("prescribed-q0 requires g' >= 0 at integer points")
            return math.sqrt(gp)
        return self.alpha(m) * 2.0 ** m

    def betas(self, n: int) -> np.ndarray:
        """Array of beta_0 .. beta_{n-1}."""
        return np.array([self.beta(m) for m in range(n)], dtype=float)

    def s_squared(self, n: int) -> float:
        """s_n^2 = sum_{m<n} beta_m^2; closed form where one exists."""
        if n < 1:
            raise PhivarError("level must satisfy n >= 1")
        if self.kind == "takagi":
            return float(n)
        if self.kind == "geometric":
            r = (2.0 * self.a) ** 2
            if r == 1.0:
                return float(n)
            return (r ** n - 1.0) / (r - 1.0)
        if self.kind == "prescribed-q" and self._g_const() is not None:
            c = self._g_const()
            return c * (2.0 ** (2 * self.q * n) - 1.0)
        return float(math.fsum(self.beta(m) ** 2 for m in range(n)))

    def _g_const(self) -> Optional[float]:
        if self.g is not None and self.g.is_parametric \
                and all(f.form == "const" for f in self.g.factors):
            return self.g.eval(1.0)
        return None

    def abs_beta_sum(self, n: int) -> float:
        """sum_{m<n} |beta_m| — a priori bound on 2^n * max increment."""
        return float(math.fsum(abs(self.beta(m)) for m in range(n)))

    # -- tail control ------------------------------------------------------

    def tail_bound(self, M: int) -> float:
        """Upper bound on (1/2) sum_{m>M} |alpha_m|.

        This is the uniform error of truncating the expansion at level M,
        since the tent map takes values in [0, 1/2].  Closed form per kind.
        """
        if M < 0:
            raise PhivarError("truncation level must be nonnegative")
        if self.kind == "takagi":
            return 0.5 * 2.0 ** -M
        if self.kind == "geometric":
            r = abs(self.a)
            if r == 0.0:
                return 0.0
            return 0.5 * r ** (M + 1) / (1.0 - r)
        if self.kind == "explicit":
            return 0.5 * float(math.fsum(
                abs(x) for x in self.alphas[M + 1:])) if M + 1 < len(self.alphas) else 0.0
        if self.kind == "faber":
            return 0.5 * float(math.fsum(
                10.0 ** -j for j, f in _factorials_upto(self.max_level) if f > M))
        if self.kind == "prescribed-q":
            return 0.5 * self._prescribed_tail(M, 2.0 ** -(1.0 - self.q),
                                               lambda m: self.alpha(m),
                                               self.g.ratio_sup)
        # prescribed-q0
        return 0.5 * self._prescribed_tail(M, 0.5, lambda m: self.alpha(m),
                                           self.g.derivative_ratio_sup)

    def beta_tail_bound(self, M: int) -> float:
        """Upper bound on sum_{m>M} |beta_m| (finite only in the convergent regime)."""
        if self.kind == "explicit":
            return float(math.fsum(abs(self.alphas[m]) * 2.0 ** m
                                   for m in range(M + 1, len(self.alphas))))
        if self.kind == "geometric":
            r = abs(2.0 * self.a)
            if r >= 1.0:
                raise PhivarError("beta tail diverges for |2a| >= 1")
            return r ** (M + 1) / (1.0 - r)
        if self.kind == "prescribed-q0":
            return self._prescribed_tail(M, 1.0, lambda m: self.beta(m),
                                         self.g.derivative_ratio_sup)
        raise PhivarError(f"beta tail bound not available for kind {self.kind!r}")

    def _prescribed_tail(self, M, decay, term, ratio_sup_fn) -> float:
        """sum_{m>M} term(m) bounded via term ratio <= decay * sqrt(g-ratio sup)."""
        if self.g is not None and not self.g.is_parametric:
            raise PhivarError("tail bound needs a parametric g (custom g unsupported)")
        total = 0.0
        m = M + 1
        # advance until the one-step ratio bound falls below 1, summing as we go
        while True:
            r = decay * math.sqrt(ratio_sup_fn(float(m)))
            if r < 1.0:
                t = term(m)
                if t == 0.0:
                    return total
                return total + t / (1.0 - r)
            total += term(m)
            m += 1
            if m > M + 100000:
                raise PhivarError("tail bound did not converge (g grows too fast)")

    # -- asymptotic profile --------------------------------------------------

    def limit_profile(self):
        """(q, g) with s_n^2 / (2^{2qn} g(n)) -> 1, when known for this kind.

        Returns a (q, g, g_limit) tuple where g_limit is the finite limit of
        g when it exists (constant g), else None; returns None when the kind
        has no built-in profile (explicit, faber) or is in the
        bounded-variation regime (geometric with |2a| < 1).
        """
        if self.kind == "takagi":
            return 0.0, RegularlyVaryingFn.power(1.0), None
        if self.kind == "geometric":
            r = abs(2.0 * self.a)
            if r == 1.0:
                return 0.0, RegularlyVaryingFn.power(1.0), None
            if r < 1.0:
                return None
            c = 1.0 / (r * r - 1.0)
            return math.log2(r), RegularlyVaryingFn.constant(c), c
        if self.kind == "prescribed-q":
            return self.q, self.g, self._g_const()
        if self.kind == "prescribed-q0":
            g0 = self.g.eval(0.0)
            shifted = RegularlyVaryingFn.from_callable(
                lambda x: self.g.eval(x) - g0 + _SHIFT_FLOOR, index=self.g.index)
            return 0.0, shifted, None
        return None

    def spec_dict(self) -> dict:
        d = {"kind": self.kind, "max_level": self.max_level}
        if self.kind == "geometric":
            d["a"] = self.a
        elif self.kind == "explicit":
            d["alphas"] = list(self.alphas)
        elif self.kind == "prescribed-q":
            d["q"] = self.q
            d["g"] = self.g.spec_string()
        elif self.kind == "prescribed-q0":
            d["g"] = self.g.spec_string()
        return d


# keeps the shifted profile g(x) - g(0) strictly positive near 0
_SHIFT_FLOOR = 1e-12


@dataclass
class ExponentReport:
    """Growth-exponent estimates over an n-range.

    q_low/q_high are min/max of q_n = (1/n) log2 s_n over the range; q_last
    is the final value and p_critical = 1/(1 - q_last) (None when
    q_last >= 1).  The two flags classify the expected power-variation
    behavior at p = p_critical: liminf-zero when p(1 - q_low) > 1, and
    limsup-infinite when p(1 - q_high) < 1.
    """

    q_low: float
    q_high: float
    q_last: float
    p_critical: Optional[float]
    liminf_zero_expected: bool
    limsup_infinite_expected: bool
    q_values: list


def critical_exponents(scheme: CoefficientScheme, n_range: Sequence[int]) -> ExponentReport:
    """Estimate q_* and q^* from q_n over the given levels."""
    ns = sorted(set(int(n) for n in n_range))
    if not ns or ns[0] < 1:
        raise PhivarError("n-range must be a nonempty range of levels >= 1")
    qs = []
    for n in ns:
        s2 = scheme.s_squared(n)
        if s2 <= 0:
            raise PhivarError(f"s_{n}^2 = 0; growth exponent undefined")
        qs.append((n, math.log2(s2) / (2.0 * n)))
    q_low = min(q for _, q in qs)
    q_high = max(q for _, q in qs)
    q_last = qs[-1][1]
    p = 1.0 / (1.0 - q_last) if q_last < 1.0 else None
    liminf_zero = p is not None and p * (1.0 - q_low) > 1.0
    limsup_inf = p is not None and p * (1.0 - q_high) < 1.0
    return ExponentReport(q_low, q_high, q_last, p, liminf_zero, limsup_inf, qs)


@dataclass
class ConditionReport:
    """Growth-condition ratios and verdicts.

    Four conditions tie beta_n^2 and s_n^2 to 2^{2qn} times a slowly
    varying scale:

        (i)   beta_n^2 / L(b^n)            -> 1          (q = 0, needs L)
        (ii)  s_n^2 / ell(b^n)             -> 1          (q = 0, needs ell)
        (iii) beta_n^2 / (2^{2qn} ell(b^n)) -> 1         (q > 0)
        (iv)  s_n^2 / (2^{2qn} ell(b^n))   -> (2^{2q}-1)^{-1}   (q > 0)

    A condition is "converges-to-target" when the last 10 reported ratios
    all lie within 1% of its target; otherwise "inconclusive" (conditions
    whose inputs are missing or that do not apply at this q are
    inconclusive with an empty ratio list).  ratio_last estimates
    lim s_{n-1}^2/s_n^2 and is compared against 2^{-2q} (see module note).
    """

    q: float
    b: float
    ratios_beta: list       # (n, ratio) for (i) at q=0 or (iii) at q>0
    ratios_s: list          # (n, ratio) for (ii) at q=0 or (iv) at q>0
    verdicts: dict          # {"i"|"ii"|"iii"|"iv": "converges-to-target"|"inconclusive"}
    ratio_last: float       # s_{n-1}^2 / s_n^2 at the final level
    ratio_target: float     # 2^{-2q}


_VERDICT_WINDOW = 10
_VERDICT_RTOL = 0.01


def _verdict(ratios, target):
    if len(ratios) < _VERDICT_WINDOW:
        return "inconclusive"
    tail = [r for _, r in ratios[-_VERDICT_WINDOW:]]
    if all(abs(r / target - 1.0) <= _VERDICT_RTOL for r in tail):
        return "converges-to-target"
    return "inconclusive"


def check_conditions(scheme: CoefficientScheme, q: float, b: float,
                     n_range: Sequence[int],
                     L: Optional[RegularlyVaryingFn] = None,
                     ell: Optional[RegularlyVaryingFn] = None) -> ConditionReport:
    """Tabulate the four growth-condition ratios over n_range.

    Pass L (slowly varying) to check (i); ell is built from L when not
    given.  At q = 0 conditions (iii)/(iv) do not apply; at q > 0
    conditions (i)/(ii) do not apply.  Inconclusive is a valid verdict.
    """
    if not b > 1.0:
        raise PhivarError("base b must exceed 1")
    if q < 0:
        raise PhivarError("q must be nonnegative")
    if L is None and ell is None:
        raise PhivarError("need L or ell to evaluate the growth conditions")
    if ell is None:
        ell = build_ell(L, b)
    ns = sorted(set(int(n) for n in n_range))
    if not ns or ns[0] < 1:
        raise PhivarError("n-range must be a nonempty range of levels >= 1")

    ratios_beta_L = []    # (i)
    ratios_s_ell = []     # (ii) at q=0 / (iv) at q>0 share the s-ratio list
    ratios_beta_ell = []  # (iii)
    for n in ns:
        scale = 2.0 ** (2.0 * q * n) * ell.eval(b ** n)
        s_ratio = scheme.s_squared(n) / scale
        if not (math.isfinite(s_ratio) and s_ratio > 0):
            raise PhivarError(f"non-positive condition ratio at n={n}")
        ratios_s_ell.append((n, s_ratio))
        b2 = scheme.beta(n) ** 2
        ratios_beta_ell.append((n, b2 / scale))
        if L is not None:
            ratios_beta_L.append((n, b2 / L.eval(b ** n)))

    verdicts = {"i": "inconclusive", "ii": "inconclusive",
                "iii": "inconclusive", "iv": "inconclusive"}
    if q == 0.0:
        verdicts["i"] = _verdict(ratios_beta_L, 1.0)
        verdicts["ii"] = _verdict(ratios_s_ell, 1.0)
        ratios_beta = ratios_beta_L
    else:
        verdicts["iii"] = _verdict(ratios_beta_ell, 1.0)
        verdicts["iv"] = _verdict(ratios_s_ell, 1.0 / (2.0 ** (2 * q) - 1.0))
        ratios_beta = ratios_beta_ell

    n_last = ns[-1]
    ratio_last = (scheme.s_squared(n_last - 1) / scheme.s_squared(n_last)
                  if n_last >= 2 else float("nan"))
    return ConditionReport(q=q, b=b, ratios_beta=ratios_beta,
                           ratios_s=ratios_s_ell, verdicts=verdicts,
                           ratio_last=ratio_last,
                           ratio_target=2.0 ** (-2.0 * q))
