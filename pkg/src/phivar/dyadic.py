"""Tent map, sign fields, exact dyadic increments, and sample paths.

For f(t) = sum_m alpha_m sigma_m(t) phi(2^m t) with phi the tent map, the
increment over the k-th level-n dyadic cell is an exact finite signed sum:
levels m >= n contribute nothing (phi vanishes at integers), and level
m < n contributes beta_m times the tent slope +-1 on that cell, so

    f((k+1) 2^-n) - f(k 2^-n)
        = 2^-n * sum_{m<n} beta_m * sigma(m, cell_m(k)) * eps_m(k),

where eps_m(k) = +1 iff bit (n-m-1) of k is 0, and cell_m(k) is the 1-based
level-m cell containing the cell [k 2^-n, (k+1) 2^-n).  Everything here is
built from the bits of k; no floating subtraction of nearby values of f
occurs, so increments keep full relative precision at any level.

Enumeration over all 2^n cells works in contiguous aligned blocks.  For
constant signs the signed sums over a block are an offset (from the fixed
high bits of k) plus a precomputed table over the low bits, which makes the
per-cell cost a few vectorized flops; per-block partial results are merged
in fixed block order so results do not depend on the number of worker
threads.

Random sign fields need O(1) random access to the sign of any (level, cell)
pair, so signs are drawn from a counter-based construction: a SplitMix64
finalizer applied to a key mixed from (seed, level, cell).  Two fields with
equal seeds agree everywhere, and any sign can be computed without
materializing a level.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CapExceededError, PhivarError
from .scheme import CoefficientScheme

ENUM_LEVEL_CAP = 40
PATH_LEVEL_CAP = 26
DEFAULT_BLOCK_BITS = 20
DEFAULT_TOLERANCE = 1e-12

_U64 = np.uint64
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def tent(t):
    """Distance from t to the nearest integer (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise PhivarError("tent map requires finite input")
    out = np.abs(t - np.rint(t))
    return float(out) if out.ndim == 0 else out


def _mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> _U64(30)
    x *= _U64(_MIX1)
    x ^= x >> _U64(27)
    x *= _U64(_MIX2)
    x ^= x >> _U64(31)
    return x


def _mix64_int(x: int) -> int:
    """SplitMix64 finalizer on python ints (mod 2^64); agrees with _mix64."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * _MIX1) & _MASK64
    x ^= x >> 27
    x = (x * _MIX2) & _MASK64
    x ^= x >> 31
    return x


class SignField:
    """Sign structure sigma(m, k) in {-1,+1}, constant per (level, cell).

    Cells are 1-based: level m has cells k = 1..2^m covering
    [(k-1) 2^-m, k 2^-m); the right endpoint t = 1 takes the last cell's
    sign (every term vanishes there anyway).  Immutable; concurrent reads
    are safe.
    """

    def __init__(self, kind: str, rule: Optional[Callable] = None,
                 seed: Optional[int] = None):
        if kind not in ("classic", "rule", "random"):
            raise PhivarError(f"unknown sign field kind {kind!r}")
        if kind == "rule" and rule is None:
            raise PhivarError("rule sign field needs a predicate")
        if kind == "random" and seed is None:
            raise PhivarError("random sign field needs a seed")
        self.kind = kind
        self._rule = rule
        self.seed = seed
        if kind == "random":
            # per-level key; cell index is mixed in at query time
            self._seed64 = np.uint64(seed & _MASK64)

    @staticmethod
    def classic() -> "SignField":
        """All signs +1 (the plain Takagi-class expansion)."""
        return SignField("classic")

    @staticmethod
    def from_rule(rule: Callable[[int, int], int]) -> "SignField":
        """Deterministic rule(m, k) -> {-1,+1}; must be a pure function of (m, k)."""
        return SignField("rule", rule=rule)

    @staticmethod
    def random(seed: int) -> "SignField":
        """Seeded i.i.d. symmetric signs with O(1) random access."""
        return SignField("random", seed=seed)

    @property
    def is_classic(self) -> bool:
        return self.kind == "classic"

    def sign(self, m: int, k: int) -> int:
        """Sign of level-m cell k, k in [1, 2^m].

        Accepts arbitrarily large cell indices (levels beyond 63 arise when
        evaluating deep truncations); indices above 2^64 are hashed limb by
        limb, staying consistent with the vectorized path below it.
        """
        if m < 0 or not (1 <= k <= (1 << max(m, 0))):
            raise PhivarError(f"cell index {k} out of range for level {m}")
        if self.kind == "classic":
            return 1
        if self.kind == "rule":
            s = int(self._rule(m, k))
            if s not in (-1, 1):
                raise PhivarError("sign rule must return -1 or +1")
            return s
        level_key = _mix64_int((int(self._seed64) + _GOLDEN * (m + 1)) & _MASK64)
        h = level_key
        kk = int(k)
        while True:
            limb = kk & _MASK64
            h = _mix64_int(h ^ ((limb * _GOLDEN) & _MASK64))
            kk >>= 64
            if kk == 0:
                break
        return 1 - 2 * (h >> 63)

    def sign_array(self, m: int, cells: np.ndarray) -> np.ndarray:
        """Vectorized signs (float +-1.0) for 1-based cell indices at level m."""
        if self.kind == "classic":
            return np.ones(len(cells))
        if self.kind == "rule":
            return np.array([float(self.sign(m, int(k))) for k in cells])
        with np.errstate(over="ignore"):
            level_key = _mix64(np.array(
                [(self._seed64 + _U64((_GOLDEN * (m + 1)) & _MASK64))], dtype=np.uint64))[0]
            h = _mix64(level_key ^ (cells.astype(np.uint64) * _U64(_GOLDEN)))
        return 1.0 - 2.0 * (h >> _U64(63)).astype(float)

    def sign_at_time(self, m: int, t: float) -> int:
        """Sign governing level m at time t in [0, 1]."""
        cell = min(int(math.floor(t * (1 << m))), (1 << m) - 1) + 1
        return self.sign(m, cell)

    def spec_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "random":
            d["seed"] = self.seed
        return d


def eval_f(scheme: CoefficientScheme, signfield: SignField, t,
           tolerance: float = DEFAULT_TOLERANCE):
    """Truncated series value of f at t (scalar or array), abs error <= tolerance.

    Truncates at the smallest level M with tail_bound(M) <= tolerance;
    raises if the scheme's max level cannot reach the tolerance.
    """
    if tolerance <= 0:
        raise PhivarError("tolerance must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > 1):
        raise PhivarError("f is defined on [0, 1]")
    M = _truncation_level(scheme, tolerance)
    out = np.zeros_like(t_arr)
    flat = t_arr.reshape(-1)
    for m in range(M + 1):
        a = scheme.alpha(m)
        if a == 0.0:
            continue
        phis = tent(t_arr * float(2.0 ** m))
        if signfield.is_classic:
            out = out + a * phis
        else:
            if m <= 62:
                cells = np.minimum((t_arr * (1 << m)).astype(np.int64),
                                   (1 << m) - 1) + 1
                sg = signfield.sign_array(m, cells.reshape(-1).astype(np.uint64))
            else:
                # cell indices no longer fit machine words; scalar fallback
                # (scaling a dyadic float by 2^m is exact, so int() is exact)
                top = (1 << m) - 1
                sg = np.array([float(signfield.sign(m, min(int(t * 2.0 ** m), top) + 1))
                               for t in flat])
            sg = sg.reshape(t_arr.shape) if t_arr.ndim else sg[0]
            out = out + a * sg * phis
    return float(out) if out.ndim == 0 else out


def _truncation_level(scheme: CoefficientScheme, tolerance: float) -> int:
    for M in range(scheme.max_level + 1):
        if scheme.tail_bound(M) <= tolerance:
            return M
    raise CapExceededError(
        f"tolerance {tolerance:g} unreachable within max level {scheme.max_level}")


def increment(scheme: CoefficientScheme, signfield: SignField, n: int, k: int) -> float:
    """Exact increment f((k+1) 2^-n) - f(k 2^-n) over one level-n cell.

    Pure per-cell reference; the enumeration path below is the fast route.
    """
    if n < 1:
        raise PhivarError("level must satisfy n >= 1")
    if not (0 <= k < (1 << n)):
        raise PhivarError(f"cell index {k} out of range for level {n}")
    total = 0.0
    for m in range(n):
        eps = 1.0 if ((k >> (n - m - 1)) & 1) == 0 else -1.0
        sg = 1.0 if signfield.is_classic else float(signfield.sign(m, (k >> (n - m)) + 1))
        total += scheme.beta(m) * sg * eps
    return 2.0 ** -n * total


def _signed_sum_table(betas: np.ndarray, n: int, nbits: int) -> np.ndarray:
    """table[r] = sum_{i<nbits} betas[n-1-i] * (+1 if bit i of r is 0 else -1)."""
    table = np.zeros(1)
    for i in range(nbits):
        c = betas[n - 1 - i]
        table = np.concatenate([table + c, table - c])
    return table


def _block_sums_classic(betas, n, nbits, k0, count, table):
    """Signed sums (not yet scaled by 2^-n) for k in [k0, k0+count)."""
    off = 0.0
    for i in range(nbits, n):
        off += betas[n - 1 - i] * (1.0 - 2.0 * ((k0 >> i) & 1))
    lo = k0 & ((1 << nbits) - 1)
    return table[lo:lo + count] + off


def _block_sums_signed(scheme, signfield, n, nbits, k0, count):
    """Signed sums for arbitrary sign fields over k in [k0, k0+count)."""
    betas = scheme.betas(n)
    base = 0.0
    for m in range(n):
        s = n - m
        if s > nbits:
            eps = 1.0 - 2.0 * ((k0 >> (s - 1)) & 1)
            base += betas[m] * float(signfield.sign(m, (k0 >> s) + 1)) * eps
    ks = np.arange(k0, k0 + count, dtype=np.uint64)
    acc = np.full(count, base)
    for m in range(max(n - nbits, 0), n):
        s = n - m
        cells = (ks >> _U64(s)) + _U64(1)
        sg = signfield.sign_array(m, cells)
        eps = 1.0 - 2.0 * ((ks >> _U64(s - 1)) & _U64(1)).astype(float)
        acc += betas[m] * sg * eps
    return acc


def iter_increment_blocks(scheme: CoefficientScheme, signfield: SignField, n: int,
                          k_stop: Optional[int] = None,
                          block_bits: int = DEFAULT_BLOCK_BITS):
    """Yield (k0, increments) blocks covering k = 0 .. k_stop-1 in index order."""
    if n < 1:
        raise PhivarError("level must satisfy n >= 1")
    if n > ENUM_LEVEL_CAP:
        raise CapExceededError(f"enumeration level {n} exceeds cap {ENUM_LEVEL_CAP}")
    total = 1 << n
    if k_stop is None:
        k_stop = total
    if not (0 <= k_stop <= total):
        raise PhivarError("k_stop out of range")
    nbits = min(block_bits, n)
    scale = 2.0 ** -n
    if signfield.is_classic:
        betas = scheme.betas(n)
        table = _signed_sum_table(betas, n, nbits)
        for k0 in range(0, k_stop, 1 << nbits):
            count = min(1 << nbits, k_stop - k0)
            yield k0, scale * _block_sums_classic(betas, n, nbits, k0, count, table)
    else:
        for k0 in range(0, k_stop, 1 << nbits):
            count = min(1 << nbits, k_stop - k0)
            yield k0, scale * _block_sums_signed(scheme, signfield, n, nbits, k0, count)


def enumerate_increments(scheme: CoefficientScheme, signfield: SignField, n: int,
                         visitor: Optional[Callable] = None,
                         k_stop: Optional[int] = None,
                         block_bits: int = DEFAULT_BLOCK_BITS,
                         threads: int = 1):
    """Visit all level-n increments in index order.

    The visitor receives (k0, block) with block a float array of consecutive
    increments starting at cell k0; its return values are collected.  A
    visitor exception aborts the sweep and propagates.  Returns
    (telescoped_sum, visitor_results); the telescoped sum over a full sweep
    is f(1) - f(0) = 0 up to float roundoff.

    With threads > 1 (classic signs), block computation is distributed over
    a thread pool but block sums are merged in fixed block order, so the
    result is independent of the thread count.  The visitor, if given, is
    always called sequentially in index order.
    """
    if visitor is None and threads > 1 and signfield.is_classic:
        if n > ENUM_LEVEL_CAP:
            raise CapExceededError(f"enumeration level {n} exceeds cap {ENUM_LEVEL_CAP}")
        total = 1 << n
        stop = total if k_stop is None else k_stop
        nbits = min(block_bits, n)
        betas = scheme.betas(n)
        table = _signed_sum_table(betas, n, nbits)
        scale = 2.0 ** -n
        starts = list(range(0, stop, 1 << nbits))

        def block_sum(k0):
            count = min(1 << nbits, stop - k0)
            return float(np.sum(_block_sums_classic(betas, n, nbits, k0, count, table)))

        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(block_sum, starts))
        return scale * math.fsum(parts), []

    parts = []
    results = []
    for k0, block in iter_increment_blocks(scheme, signfield, n, k_stop, block_bits):
        parts.append(float(np.sum(block)))
        if visitor is not None:
            results.append(visitor(k0, block))
    return math.fsum(parts), results


@dataclass
class DyadicPath:
    """Values of the sign-modified expansion on the level-N dyadic grid."""

    level: int
    values: np.ndarray          # 2^N + 1 values, values[k] = X(k 2^-N)
    scheme_id: dict
    signfield_id: dict
    seed: Optional[int] = None

    MAGIC = b"PHIVPATH"

    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) / float(1 << self.level)

    def to_csv(self, path: str) -> None:
        """CSV export with header t,value."""
        with open(path, "w") as fh:
            fh.write("t,value\n")
            denom = 1 << self.level
            for k, v in enumerate(self.values):
                fh.write(f"{k / denom:.17g},{v:.17g}\n")

    def to_binary(self, path: str) -> None:
        """16-byte header (magic, level as u64 LE) then float64 LE values."""
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write(struct.pack("<Q", self.level))
            fh.write(self.values.astype("<f8").tobytes())

    @classmethod
    def from_binary(cls, path: str) -> "DyadicPath":
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != cls.MAGIC:
                raise PhivarError("not a dyadic path file (bad magic)")
            (level,) = struct.unpack("<Q", fh.read(8))
            values = np.frombuffer(fh.read(), dtype="<f8")
        if len(values) != (1 << level) + 1:
            raise PhivarError("dyadic path file truncated")
        return cls(level=int(level), values=values.copy(),
                   scheme_id={}, signfield_id={})


def gen_path(scheme: CoefficientScheme, signfield: SignField, N: int,
             tolerance: float = DEFAULT_TOLERANCE) -> DyadicPath:
    """Exact path values on the level-N grid via cumulative increments.

    Terms at levels m >= N vanish identically at level-N grid points, so
    the cumulative sum of the 2^N exact increments gives the grid values
    with no series truncation; tolerance is accepted for interface
    symmetry with eval_f but does not enter.
    """
    if tolerance <= 0:
        raise PhivarError("tolerance must be positive")
    if N < 1:
        raise PhivarError("level must satisfy N >= 1")
    if N > PATH_LEVEL_CAP:
        raise CapExceededError(f"path level {N} exceeds memory cap {PATH_LEVEL_CAP}")
    values = np.zeros((1 << N) + 1)
    pos = 1
    for k0, block in iter_increment_blocks(scheme, signfield, N):
        values[pos:pos + len(block)] = block
        pos += len(block)
    np.cumsum(values, out=values)
    return DyadicPath(level=N, values=values, scheme_id=scheme.spec_dict(),
                      signfield_id=signfield.spec_dict(),
                      seed=signfield.seed)
