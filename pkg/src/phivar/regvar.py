"""Regularly varying functions and the gauge Phi_q built from them.

A measurable g: [0, infinity) -> (0, infinity) is regularly varying with
index rho if g(lam*x)/g(x) -> lam**rho as x -> infinity, for every lam > 0.
This module provides a small parametric family that is closed under
products and covers the coefficient constructions used elsewhere:

    const:C       g(x) = C                         (index 0)
    pow:RHO       g(x) = max(x, a)**RHO            (index RHO, clamp a = 1)
    spow:RHO      g(x) = (1 + x)**RHO              (index RHO)
    logpow:KAPPA  g(x) = log(e + x)**KAPPA         (index 0)
    mul(...)      product of the above             (index = sum of indices)

The power form must be redefined near 0 to stay strictly positive; we clamp
it to its value at ``clamp_at`` (default 1), which changes nothing at
infinity.  A custom callable with a declared index is also accepted.

The gauge built from (q, g) with 0 <= q < 1 is

    Phi_q(x) = x**(1/(1-q)) * g(-log2(x) / (1-q))**(-1/(2*(1-q)))

for 0 < x < 1, extended by Phi_q(0) = 0.  Phi_q is regularly varying at
zero with index 1/(1-q); for g == 1 it reduces to x**(1/(1-q)) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import GaugeDomainError, PhivarError

_LN2 = math.log(2.0)

_PARAM_FORMS = ("const", "pow", "spow", "logpow")


@dataclass(frozen=True)
class _Factor:
    form: str                       # one of _PARAM_FORMS or "custom"
    param: float = 0.0              # C, rho, or kappa
    fn: Optional[Callable] = None   # custom eval
    dfn: Optional[Callable] = None  # custom derivative
    index: float = 0.0              # regular-variation index of this factor


@dataclass(frozen=True)
class RegularlyVaryingFn:
    """A strictly positive regularly varying function on [0, infinity).

    Immutable; safe for concurrent reads.
    """

    factors: tuple = field(default_factory=tuple)
    clamp_at: float = 1.0

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(c: float) -> "RegularlyVaryingFn":
        if not (c > 0 and math.isfinite(c)):
            raise PhivarError(f"constant factor must be positive and finite, got {c}")
        return RegularlyVaryingFn((_Factor("const", c, index=0.0),))

    @staticmethod
    def power(rho: float, clamp_at: float = 1.0) -> "RegularlyVaryingFn":
        if clamp_at <= 0:
            raise PhivarError("clamp_at must be positive")
        return RegularlyVaryingFn((_Factor("pow", rho, index=rho),), clamp_at)

    @staticmethod
    def shifted_power(rho: float) -> "RegularlyVaryingFn":
        return RegularlyVaryingFn((_Factor("spow", rho, index=rho),))

    @staticmethod
    def log_power(kappa: float) -> "RegularlyVaryingFn":
        return RegularlyVaryingFn((_Factor("logpow", kappa, index=0.0),))

    @staticmethod
    def from_callable(fn: Callable, index: float,
                      derivative: Optional[Callable] = None) -> "RegularlyVaryingFn":
        return RegularlyVaryingFn((_Factor("custom", 0.0, fn, derivative, index),))

    @staticmethod
    def product(*fns: "RegularlyVaryingFn") -> "RegularlyVaryingFn":
        facs = []
        clamp = 1.0
        for f in fns:
            facs.extend(f.factors)
            clamp = max(clamp, f.clamp_at)
        return RegularlyVaryingFn(tuple(facs), clamp)

    # -- properties --------------------------------------------------------

    @property
    def index(self) -> float:
        """Regular-variation index (sum over factors)."""
        return float(sum(f.index for f in self.factors))

    @property
    def has_derivative(self) -> bool:
        return all(f.form in _PARAM_FORMS or f.dfn is not None for f in self.factors)

    @property
    def is_parametric(self) -> bool:
        return all(f.form in _PARAM_FORMS for f in self.factors)

    # -- evaluation --------------------------------------------------------

    def _factor_eval(self, f: _Factor, x):
        if f.form == "const":
            return np.full_like(x, f.param, dtype=float) if np.ndim(x) else f.param
        if f.form == "pow":
            return np.maximum(x, self.clamp_at) ** f.param
        if f.form == "spow":
            return (1.0 + x) ** f.param
        if f.form == "logpow":
            return np.log(math.e + x) ** f.param
        return f.fn(x)

    def eval(self, x):
        """g(x) for x >= 0 (scalar or array)."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise PhivarError("non-finite argument to regularly varying function")
        if np.any(x < 0):
            raise PhivarError("regularly varying functions are defined on [0, infinity)")
        out = np.ones_like(x)
        for f in self.factors:
            out = out * self._factor_eval(f, x)
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def _factor_derivative(self, f: _Factor, x):
        if f.form == "const":
            return np.zeros_like(x)
        if f.form == "pow":
            d = f.param * np.maximum(x, self.clamp_at) ** (f.param - 1.0)
            return np.where(x < self.clamp_at, 0.0, d)
        if f.form == "spow":
            return f.param * (1.0 + x) ** (f.param - 1.0)
        if f.form == "logpow":
            return f.param * np.log(math.e + x) ** (f.param - 1.0) / (math.e + x)
        if f.dfn is None:
            raise PhivarError("derivative not available for this custom factor")
        return f.dfn(x)

    def derivative(self, x):
        """g'(x), by the product rule over factors."""
        if not self.has_derivative:
            raise PhivarError("derivative not available")
        x = np.asarray(x, dtype=float)
        vals = [self._factor_eval(f, x) for f in self.factors]
        total = np.zeros_like(x)
        for i, f in enumerate(self.factors):
            term = self._factor_derivative(f, x)
            for j, v in enumerate(vals):
                if j != i:
                    term = term * v
            total = total + term
        return float(total) if total.ndim == 0 else total

    def ratio_sup(self, x0: float) -> float:
        """Upper bound on sup_{x >= x0} g(x+1)/g(x).

        Used for geometric tail bounds of coefficient schemes.  Each
        parametric factor has a monotone step ratio tending to 1, so the
        supremum is attained at x0 (for a growing factor) or bounded by 1
        (for a shrinking one); a product is bounded by the product of the
        factor bounds.
        """
        if not self.is_parametric:
            raise PhivarError("ratio_sup requires a parametric form")
        x0 = max(x0, 0.0)
        bound = 1.0
        for f in self.factors:
            if f.form == "const":
                continue
            if f.form == "pow":
                base = max(x0, self.clamp_at)
                r = ((base + 1.0) / base) ** f.param
            elif f.form == "spow":
                r = ((2.0 + x0) / (1.0 + x0)) ** f.param
            else:  # logpow
                r = (math.log(math.e + x0 + 1.0) / math.log(math.e + x0)) ** f.param
            bound *= max(r, 1.0)
        return bound

    def derivative_ratio_sup(self, x0: float) -> float:
        """Upper bound on sup_{x >= x0} g'(x+1)/g'(x) for single-factor g.

        Only needed by the q = 0 coefficient recipe; products are rejected
        (the derivative of a product has no per-factor ratio bound).
        """
        nonconst = [f for f in self.factors if f.form != "const"]
        if len(nonconst) != 1 or not self.is_parametric:
            raise PhivarError("derivative_ratio_sup requires a single-factor parametric g")
        f = nonconst[0]
        x0 = max(x0, 0.0)
        if f.form == "pow":
            base = max(x0, self.clamp_at)
            r = ((base + 1.0) / base) ** (f.param - 1.0)
        elif f.form == "spow":
            r = ((2.0 + x0) / (1.0 + x0)) ** (f.param - 1.0)
        else:  # logpow: ratio of log^{kappa-1} times (e+x)/(e+x+1) < first factor
            r = (math.log(math.e + x0 + 1.0) / math.log(math.e + x0)) ** (f.param - 1.0)
        return max(r, 1.0)

    # -- serialization -----------------------------------------------------

    def spec_string(self) -> str:
        """Expression in the config grammar (const:C, pow:R, spow:R, logpow:K, mul(...))."""
        parts = []
        for f in self.factors:
            if f.form == "const":
                parts.append(f"const:{f.param:g}")
            elif f.form in ("pow", "spow", "logpow"):
                parts.append(f"{f.form}:{f.param:g}")
            else:
                parts.append("custom")
        if not parts:
            return "const:1"
        if len(parts) == 1:
            return parts[0]
        return "mul(" + ",".join(parts) + ")"


def parse_g(expr: str) -> RegularlyVaryingFn:
    """Parse the g-expression grammar.

    Grammar: ``const:C``, ``pow:RHO``, ``spow:RHO``, ``logpow:KAPPA``,
    ``mul(e1,e2,...)`` where each ``ei`` is again an expression.
    """
    expr = expr.strip()
    if expr.startswith("mul(") and expr.endswith(")"):
        inner = expr[4:-1]
        parts, depth, cur = [], 0, []
        for ch in inner:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch == "," and depth == 0:
                parts.append("".join(cur))
                cur = []
            else:
                cur.append(ch)
        if cur:
            parts.append("".join(cur))
        if not parts:
            raise PhivarError("empty mul(...) expression")
        return RegularlyVaryingFn.product(*(parse_g(p) for p in parts))
    if ":" not in expr:
        raise PhivarError(f"cannot parse g-expression {expr!r}")
    form, _, val = expr.partition(":")
    try:
        param = float(val)
    except ValueError:
        raise PhivarError(f"bad numeric parameter in g-expression {expr!r}") from None
    if form == "const":
        return RegularlyVaryingFn.constant(param)
    if form == "pow":
        return RegularlyVaryingFn.power(param)
    if form == "spow":
        return RegularlyVaryingFn.shifted_power(param)
    if form == "logpow":
        return RegularlyVaryingFn.log_power(param)
    raise PhivarError(f"unknown g form {form!r}")


@dataclass(frozen=True)
class PhiFunction:
    """The gauge Phi_q(x) = x**(1/(1-q)) * g(-log2(x)/(1-q))**(-1/(2(1-q))).

    Defined on [0, 1) with Phi_q(0) = 0.  Immutable and thread-safe.
    """

    q: float
    g: RegularlyVaryingFn

    def __post_init__(self):
        if not (0.0 <= self.q < 1.0):
            raise PhivarError(f"q must lie in [0, 1), got {self.q}")

    @property
    def p(self) -> float:
        """Critical exponent 1/(1-q)."""
        return 1.0 / (1.0 - self.q)

    def eval(self, x):
        """Phi_q(x) for scalar or array x in [0, 1)."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(x >= 1.0):
            raise GaugeDomainError("Phi_q is defined on [0, 1)")
        pos = x > 0
        out = np.zeros_like(x)
        if np.any(pos):
            xp = x[pos] if x.ndim else x
            y = -np.log2(xp) / (1.0 - self.q)
            val = xp ** self.p * self.g.eval(y) ** (-0.5 * self.p)
            if x.ndim:
                out[pos] = val
            else:
                out = val
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def log_eval_from_log2(self, log2x):
        """log Phi_q(x) from log2(x) < 0, stable when x underflows float range.

        Used by the binomial fast path at large n, where x ~ 2**-n.
        """
        log2x = np.asarray(log2x, dtype=float)
        if np.any(log2x >= 0):
            raise GaugeDomainError("Phi_q is defined on [0, 1)")
        y = -log2x / (1.0 - self.q)
        return self.p * _LN2 * log2x - 0.5 * self.p * np.log(self.g.eval(y))

    def spec_string(self) -> str:
        return f"phi:q={self.q:g},g={self.g.spec_string()}"


def build_ell(L: RegularlyVaryingFn, b: float) -> RegularlyVaryingFn:
    """Integrated slowly varying function ell(x) = (1/log b) * int_1^x L(t)/t dt.

    Equivalently ell(b**n) = int_0^n L(b**s) ds.  ell is slowly varying and
    ell(x)/L(x) -> infinity.  Requires L slowly varying (index 0) and b > 1.
    The result is clamped below x = b (where ell(b) = int_0^1 L(b**s) ds > 0)
    to keep it strictly positive.

    Closed form for constant L; adaptive quadrature (relative tolerance
    1e-10) otherwise.
    """
    if not b > 1.0:
        raise PhivarError(f"base b must exceed 1, got {b}")
    if L.index != 0.0:
        raise PhivarError(f"L must be slowly varying (index 0), got index {L.index}")
    lnb = math.log(b)

    if L.is_parametric and all(f.form == "const" for f in L.factors):
        c = L.eval(1.0)

        def raw(u):
            return c * math.log(u) / lnb

        def draw(u):
            return c / (u * lnb)
    else:
        def raw(u):
            upper = math.log(u) / lnb
            val, _ = quad(lambda s: L.eval(b ** s), 0.0, upper,
                          epsabs=0.0, epsrel=1e-10, limit=200)
            return val

        def draw(u):
            return L.eval(u) / (u * lnb)

    def ell_eval(x):
        x = np.asarray(x, dtype=float)
        xc = np.maximum(x, b)
        if xc.ndim == 0:
            return raw(float(xc))
        return np.array([raw(float(u)) for u in xc.ravel()]).reshape(xc.shape)

    def ell_deriv(x):
        # derivative is 0 in the clamped region below b
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return 0.0 if float(x) < b else draw(float(x))
        out = np.zeros_like(x)
        mask = x >= b
        if np.any(mask):
            out[mask] = np.array([draw(float(u)) for u in x[mask].ravel()])
        return out

    return RegularlyVaryingFn.from_callable(ell_eval, index=0.0, derivative=ell_deriv)
