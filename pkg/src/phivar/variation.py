"""Partial Phi-variation sums along dyadic partitions.

For a gauge G (a power x**p or a PhiFunction) the level-n partial sum up to
time t is

    V_{n,t} = sum_{k=0}^{K} G(|f((k+1) 2^-n) - f(k 2^-n)|),
    K = floor(t 2^n)  (clamped to 2^n - 1; the sum is empty at t = 0).

Three interchangeable engines compute it:

    enumerate  exact sweep of all increments (vectorized blocks, optional
               threads; exact up to float roundoff)
    binomial   exact collapse for equal-coefficient prefixes: with all
               beta_m = beta the increment sum is beta * (n - 2j) with j
               binomial(n, 1/2), so V_n is a single weighted sum over n+1
               outcomes with log-space weights (stable to n = 10^6)
    mc         seeded Monte Carlo over uniformly drawn cells, with a
               standard error

convergence_study runs one gauge across levels and attaches the known
limit when the scheme carries one (sqrt(2/pi) * t in the q = 0 regime, and
E|Z|^(1/(1-q)) * t with Z the scaled Bernoulli-convolution limit for q > 0;
a constant-limit g scales a power gauge by c**(p/2)).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln

from .dyadic import ENUM_LEVEL_CAP, SignField, iter_increment_blocks, _signed_sum_table, \
    _block_sums_classic
from .errors import CapExceededError, GaugeDomainError, PhivarError
from .regvar import PhiFunction
from .scheme import CoefficientScheme

Gauge = Union[PhiFunction, float, int]

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

_MC_SHARDS = 16          # fixed shard count keeps results thread-count invariant
_LN2 = math.log(2.0)
# below this level the binomial path evaluates the gauge directly (sharing
# the enumerate engine's code path); above it, gauge values underflow floats
# and the log-space form takes over
_BINOMIAL_DIRECT_MAX_N = 512


def gauge_label(gauge: Gauge) -> str:
    if isinstance(gauge, PhiFunction):
        return gauge.spec_string()
    return f"power:{float(gauge):g}"


def _gauge_power(gauge: Gauge) -> Optional[float]:
    if isinstance(gauge, PhiFunction):
        return None
    p = float(gauge)
    if p < 1.0:
        raise PhivarError(f"power gauge needs p >= 1, got {p}")
    return p


def _apply_gauge(gauge: Gauge, xabs: np.ndarray) -> np.ndarray:
    p = _gauge_power(gauge)
    if p is not None:
        return xabs ** p
    out = np.zeros_like(xabs)
    pos = xabs > 0
    if np.any(pos):
        out[pos] = gauge.eval(xabs[pos])
    return out


def _check_gauge_domain(scheme: CoefficientScheme, gauge: Gauge, n: int) -> None:
    # a-priori bound: max increment <= 2^-n sum |beta_m|, O(n) instead of a scan
    if isinstance(gauge, PhiFunction):
        if 2.0 ** -n * scheme.abs_beta_sum(n) >= 1.0:
            raise GaugeDomainError(
                f"increments at level {n} may reach 1; Phi_q gauge undefined there")


def resolve_threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("PHIVAR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise PhivarError(f"bad PHIVAR_THREADS value {env!r}") from None
    return os.cpu_count() or 1


@dataclass
class VariationReport:
    """One V_{n,t} computation: engine, value, and error if stochastic."""

    n: int
    t: float
    gauge: str
    mode: str
    value: float
    stderr: float = 0.0
    wall_time: float = 0.0
    limit: Optional[float] = None
    deviation: Optional[float] = None

    def to_dict(self) -> dict:
        return {"n": self.n, "t": self.t, "gauge": self.gauge, "mode": self.mode,
                "value": self.value, "stderr": self.stderr,
                "wall_time": self.wall_time, "limit": self.limit,
                "deviation": self.deviation}


def _k_stop(n: int, t: float) -> int:
    """Number of included cells: K+1 with K = floor(t 2^n) clamped to 2^n - 1."""
    if not (0.0 <= t <= 1.0):
        raise PhivarError("time t must lie in [0, 1]")
    if t == 0.0:
        return 0
    return min(int(math.floor(t * (1 << n))), (1 << n) - 1) + 1


def variation_enumerate(scheme: CoefficientScheme, signfield: Optional[SignField],
                        gauge: Gauge, n: int, t: float = 1.0,
                        threads: Optional[int] = 1) -> VariationReport:
    """Exact partial variation sum by enumerating every increment."""
    signfield = signfield or SignField.classic()
    _check_gauge_domain(scheme, gauge, n)
    nthreads = resolve_threads(threads)
    start = time.perf_counter()
    stop = _k_stop(n, t)
    if stop == 0:
        return VariationReport(n, t, gauge_label(gauge), "enumerate", 0.0,
                               wall_time=time.perf_counter() - start)
    if nthreads > 1 and signfield.is_classic:
        value = _enumerate_threaded(scheme, gauge, n, stop, nthreads)
    else:
        parts = [float(np.sum(_apply_gauge(gauge, np.abs(block))))
                 for _, block in iter_increment_blocks(scheme, signfield, n, stop)]
        value = math.fsum(parts)
    return VariationReport(n, t, gauge_label(gauge), "enumerate", value,
                           wall_time=time.perf_counter() - start)


def _enumerate_threaded(scheme, gauge, n, stop, nthreads):
    from concurrent.futures import ThreadPoolExecutor

    if n > ENUM_LEVEL_CAP:
        raise CapExceededError(f"enumeration level {n} exceeds cap {ENUM_LEVEL_CAP}")
    nbits = min(20, n)
    betas = scheme.betas(n)
    table = _signed_sum_table(betas, n, nbits)
    scale = 2.0 ** -n
    starts = list(range(0, stop, 1 << nbits))

    def block_value(k0):
        count = min(1 << nbits, stop - k0)
        sums = _block_sums_classic(betas, n, nbits, k0, count, table)
        return float(np.sum(_apply_gauge(gauge, np.abs(sums) * scale)))

    with ThreadPoolExecutor(max_workers=nthreads) as ex:
        parts = list(ex.map(block_value, starts))
    return math.fsum(parts)  # fixed block order: thread-count invariant


def variation_binomial(scheme: CoefficientScheme, gauge: Gauge, n: int,
                       t: float = 1.0) -> VariationReport:
    """Exact fast path when beta_0 = ... = beta_{n-1}.

    The level-n increment sum collapses to beta * (n - 2j) with j binomial,
    so V_n = sum_j C(n,j) 2^-n * 2^n * G(2^-n beta |n - 2j|), evaluated with
    log-space binomial weights.  Only t = 1 is meaningful here (the
    collapse needs the full uniform cell distribution).
    """
    if t != 1.0:
        raise PhivarError("binomial fast path is defined for t = 1 only")
    betas = scheme.betas(n)
    if not np.all(betas == betas[0]):
        raise PhivarError(
            "binomial fast path needs an equal-coefficient prefix; "
            "use variation_enumerate or variation_mc")
    beta = float(abs(betas[0]))
    _check_gauge_domain(scheme, gauge, n)
    start = time.perf_counter()
    j = np.arange(n + 1, dtype=float)
    u = np.abs(n - 2.0 * j) * beta
    keep = u > 0
    j, u = j[keep], u[keep]
    logw = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1) - n * _LN2
    p = _gauge_power(gauge)
    if n <= _BINOMIAL_DIRECT_MAX_N:
        # same Phi code path as the enumerate engine: bitwise-comparable
        vals = _apply_gauge(gauge, u * 2.0 ** -n)
        terms = np.exp(logw + n * _LN2) * vals
    else:
        log2x = np.log2(u) - n
        if p is not None:
            logphi = p * _LN2 * log2x
        else:
            logphi = gauge.log_eval_from_log2(log2x)
        terms = np.exp(logw + n * _LN2 + logphi)
    value = float(np.sum(terms))
    return VariationReport(n, t, gauge_label(gauge), "binomial", value,
                           wall_time=time.perf_counter() - start)


def variation_mc(scheme: CoefficientScheme, signfield: Optional[SignField],
                 gauge: Gauge, n: int, t: float, samples: int,
                 seed: int) -> VariationReport:
    """Seeded Monte Carlo estimate of V_{n,t}.

    Draws cells uniformly from {0, ..., K}; the estimate is (K+1) times the
    sample mean of G(|increment|), with stderr (K+1) * sd / sqrt(samples).
    Sampling is split into 16 fixed shards with derived child seeds, so the
    value depends only on (config, seed).
    """
    if samples < 100:
        raise PhivarError("Monte Carlo needs at least 100 samples")
    signfield = signfield or SignField.classic()
    _check_gauge_domain(scheme, gauge, n)
    start = time.perf_counter()
    stop = _k_stop(n, t)
    label = gauge_label(gauge)
    if stop == 0:
        return VariationReport(n, t, label, f"mc({samples},{seed})", 0.0, 0.0,
                               wall_time=time.perf_counter() - start)
    betas = scheme.betas(n)
    children = np.random.SeedSequence(seed).spawn(_MC_SHARDS)
    per = [samples // _MC_SHARDS] * _MC_SHARDS
    for i in range(samples % _MC_SHARDS):
        per[i] += 1
    total = 0.0
    total_sq = 0.0
    scale = 2.0 ** -n
    for shard_seed, count in zip(children, per):
        if count == 0:
            continue
        rng = np.random.default_rng(shard_seed)
        ks = rng.integers(0, stop, size=count).astype(np.uint64)
        acc = np.zeros(count)
        if signfield.is_classic:
            for m in range(n):
                eps = 1.0 - 2.0 * ((ks >> np.uint64(n - m - 1)) & np.uint64(1)).astype(float)
                acc += betas[m] * eps
        else:
            for m in range(n):
                cells = (ks >> np.uint64(n - m)) + np.uint64(1)
                sg = signfield.sign_array(m, cells)
                eps = 1.0 - 2.0 * ((ks >> np.uint64(n - m - 1)) & np.uint64(1)).astype(float)
                acc += betas[m] * sg * eps
        vals = _apply_gauge(gauge, np.abs(acc) * scale)
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
    mean = total / samples
    var = max(total_sq - samples * mean * mean, 0.0) / (samples - 1)
    value = stop * mean
    stderr = stop * math.sqrt(var / samples)
    return VariationReport(n, t, label, f"mc({samples},{seed})", value, stderr,
                           wall_time=time.perf_counter() - start)


def theoretical_limit(scheme: CoefficientScheme, gauge: Gauge, t: float,
                      moment_depth: int = 20) -> Optional[float]:
    """Limit of V_{n,t} when the scheme carries a known (q, g) profile.

    Phi_q gauges: sqrt(2/pi) * t at q = 0, and E|Z|^(1/(1-q)) * t at q > 0
    (midpoint of the exact enumeration interval at the given depth).  Power
    gauges p: available when g has a finite constant limit c and
    p = 1/(1-q); the value is c**(p/2) times the Phi_q limit.
    """
    profile = scheme.limit_profile()
    if profile is None:
        return None
    q, _, g_const = profile
    p = _gauge_power(gauge)
    if p is None:
        if abs(gauge.q - q) > 1e-12:
            return None
        if q == 0.0:
            return SQRT_2_OVER_PI * t
        return _limit_moment(q, moment_depth) * t
    if g_const is None or abs(p * (1.0 - q) - 1.0) > 1e-12:
        return None
    base = SQRT_2_OVER_PI * t if q == 0.0 else _limit_moment(q, moment_depth) * t
    return g_const ** (p / 2.0) * base


def _limit_moment(q: float, depth: int) -> float:
    from .limits import ConvolutionSpec, moment_Z

    est = moment_Z(ConvolutionSpec(q=q, depth=depth), r=1.0 / (1.0 - q),
                   method="enum")
    return est.value


@dataclass
class StudyResult:
    """Reports across a level list plus the attached limit (if known)."""

    gauge: str
    t: float
    reports: list = field(default_factory=list)
    limit: Optional[float] = None

    def rows(self) -> list:
        return [r.to_dict() for r in self.reports]


def convergence_study(scheme: CoefficientScheme, signfield: Optional[SignField],
                      gauge: Gauge, n_list: Sequence[int], t: float = 1.0,
                      mode: str = "auto", samples: int = 10 ** 5,
                      seed: int = 0, threads: Optional[int] = 1) -> StudyResult:
    """Run one gauge across levels and report signed deviations from the limit."""
    signfield = signfield or SignField.classic()
    limit = theoretical_limit(scheme, gauge, t)
    result = StudyResult(gauge=gauge_label(gauge), t=t, limit=limit)
    for n in n_list:
        rep = _run_mode(scheme, signfield, gauge, int(n), t, mode, samples, seed, threads)
        rep.limit = limit
        rep.deviation = rep.value - limit if limit is not None else None
        result.reports.append(rep)
    return result


def _run_mode(scheme, signfield, gauge, n, t, mode, samples, seed, threads):
    if mode == "auto":
        betas = scheme.betas(n)
        if signfield.is_classic and t == 1.0 and np.all(betas == betas[0]):
            mode = "binomial"
        elif n <= 26:
            mode = "enumerate"
        else:
            mode = "mc"
    if mode == "binomial":
        return variation_binomial(scheme, gauge, n, t)
    if mode == "enumerate":
        return variation_enumerate(scheme, signfield, gauge, n, t, threads)
    if mode == "mc":
        return variation_mc(scheme, signfield, gauge, n, t, samples, seed)
    raise PhivarError(f"unknown variation mode {mode!r}")


@dataclass
class PowerVariationClass:
    """Trend classification of V_n^(r) with its evidence."""

    verdict: str                  # diverging | vanishing | stable
    slope: float                  # log2 V per level over the last half
    reports: list
    khintchine_ratios: list       # (n, V_n^(r) / (2^{n(1-r)} s_n^r))


_SLOPE_THRESHOLD = 0.05


def classify_power_variation(scheme: CoefficientScheme, r: float,
                             n_range: Sequence[int],
                             signfield: Optional[SignField] = None,
                             threads: Optional[int] = 1) -> PowerVariationClass:
    """Classify the r-th power variation trend over a level range.

    Fits the slope of log2 V_n^(r) over the last half of the range:
    above +0.05/level is diverging, below -0.05 vanishing, else stable.
    Also reports the ratio V_n^(r) / (2^{n(1-r)} s_n^r), which stays in a
    bounded band for sign-symmetric increments.
    """
    if r < 1.0:
        raise PhivarError("power variation needs r >= 1")
    signfield = signfield or SignField.classic()
    ns = sorted(set(int(n) for n in n_range))
    reports = []
    ratios = []
    for n in ns:
        rep = _run_mode(scheme, signfield, r, n, 1.0, "auto", 10 ** 5, 0, threads)
        reports.append(rep)
        sandwich = 2.0 ** (n * (1.0 - r)) * scheme.s_squared(n) ** (r / 2.0)
        ratios.append((n, rep.value / sandwich))
    half = ns[len(ns) // 2:]
    logs = [math.log2(rep.value) for rep in reports if rep.n in set(half)]
    slope = float(np.polyfit(half, logs, 1)[0])
    if slope > _SLOPE_THRESHOLD:
        verdict = "diverging"
    elif slope < -_SLOPE_THRESHOLD:
        verdict = "vanishing"
    else:
        verdict = "stable"
    return PowerVariationClass(verdict, slope, reports, ratios)
