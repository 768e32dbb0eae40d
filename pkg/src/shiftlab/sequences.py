"""Block-sparse sequence vectors in l_p / c_0, materialized lazily.

A ``SeqVector`` is a sorted list of disjoint blocks, optionally extended by a
generator that produces blocks on demand for infinite vectors.  Blocks whose
entries are ``base / (w_a ... w_b)`` are stored symbolically so that entries
of size ``2**-10**6`` cost nothing until asked for, and then come back either
as exact ``mpq`` values or as ``(sign, log|value|)`` pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from gmpy2 import mpq

from .ideals import HorizonError
from .weights import WeightSequence, is_exact_value, to_exact

__all__ = [
    "CertificateError",
    "Block",
    "ValueBlock",
    "RescaledBlock",
    "ViewBlock",
    "SeqVector",
    "Cylinder",
    "NormEstimate",
    "p_norm",
    "p_norm_pow",
    "sup_norm",
    "norm_estimate",
    "restrict",
    "combine",
    "log_abs",
]


class CertificateError(ValueError):
    """A norm was requested for a vector without a finite-norm certificate."""


def log_abs(v) -> float:
    """log|v| for nonzero exact or float v, safe far outside the binary64 range."""
    if isinstance(v, float):
        return math.log(abs(v))
    q = mpq(v)
    return math.log(abs(int(q.numerator))) - math.log(int(q.denominator))


def _signlog(values: Sequence) -> tuple[np.ndarray, np.ndarray]:
    sign = np.zeros(len(values), dtype=np.int8)
    logs = np.full(len(values), -np.inf)
    for i, v in enumerate(values):
        if v != 0:
            sign[i] = 1 if v > 0 else -1
            logs[i] = log_abs(v)
    return sign, logs


# ---------------------------------------------------------------------------
# blocks


class Block:
    offset: int
    length: int
    exact: bool

    @property
    def end(self) -> int:
        return self.offset + self.length

    def value(self, pos: int):
        raise NotImplementedError

    def log_arrays(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """(sign, log|value|) for positions ``[lo, hi)`` inside the block."""
        raise NotImplementedError

    def values(self, lo: int, hi: int) -> list:
        return [self.value(p) for p in range(lo, hi)]


@dataclass(frozen=True, eq=False)
class ValueBlock(Block):
    offset: int
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "exact", all(is_exact_value(v) for v in self.entries))
        conv = to_exact if self.exact else float
        object.__setattr__(self, "entries", tuple(conv(v) for v in self.entries))
        object.__setattr__(self, "_sl", _signlog(self.entries))

    @property
    def length(self) -> int:
        return len(self.entries)

    def value(self, pos):
        return self.entries[pos - self.offset]

    def log_arrays(self, lo, hi):
        a, b = lo - self.offset, hi - self.offset
        return self._sl[0][a:b], self._sl[1][a:b]


@dataclass(frozen=True, eq=False)
class RescaledBlock(Block):
    """Entries ``base[idx] / (w_{idx+1} ... w_pos)`` on ``[offset, offset+length)``.

    ``idx = pos - shift`` (a shifted copy of ``base``) or, when ``tile`` is
    set, ``idx = (pos - offset) % tile`` (``base`` repeated back to back).
    ``base`` is a tuple of values or another ``SeqVector``.
    """

    offset: int
    length: int
    base: object
    weights: WeightSequence
    shift: int = 0
    tile: int | None = None

    def __post_init__(self):
        if isinstance(self.base, SeqVector):
            base_exact = self.base.exact
        else:
            base_exact = all(is_exact_value(v) for v in self.base)
            conv = to_exact if base_exact else float
            object.__setattr__(self, "base", tuple(conv(v) for v in self.base))
            object.__setattr__(self, "_sl", _signlog(self.base))
        object.__setattr__(self, "exact", base_exact and self.weights.exact)
        if self.tile is None and self.offset - self.shift < 0:
            raise ValueError("rescaled block reads a negative base index")

    def index(self, pos: int) -> int:
        if self.tile is not None:
            return (pos - self.offset) % self.tile
        return pos - self.shift

    def _base_value(self, idx: int):
        if isinstance(self.base, SeqVector):
            return self.base.value(idx)
        return self.base[idx]

    def value(self, pos):
        idx = self.index(pos)
        b = self._base_value(idx)
        if b == 0:
            return mpq(0) if self.exact else 0.0
        if not self.exact:
            b = float(b)
        return b / self.weights.product(idx + 1, pos)

    def log_arrays(self, lo, hi):
        pos = np.arange(lo, hi, dtype=np.int64)
        if self.tile is not None:
            idx = (pos - self.offset) % self.tile
            bsign, blog = self._sl[0][idx], self._sl[1][idx]
        elif isinstance(self.base, SeqVector):
            idx = pos - self.shift
            bsign, blog = self.base.log_range(lo - self.shift, hi - self.shift)
        else:
            idx = pos - self.shift
            bsign, blog = self._sl[0][idx], self._sl[1][idx]
        C = self.weights.log_cumsum(hi)
        Nn = self.weights.neg_cumsum(hi)
        logs = blog - (C[pos + 1] - C[idx + 1])
        flip = ((Nn[pos + 1] - Nn[idx + 1]) & 1).astype(np.int8)
        sign = (bsign * (1 - 2 * flip)).astype(np.int8)
        return sign, np.where(sign == 0, -np.inf, logs)


@dataclass(frozen=True, eq=False)
class ViewBlock(Block):
    """The part ``[offset, offset+length)`` of another block."""

    offset: int
    length: int
    inner: Block

    def __post_init__(self):
        if self.offset < self.inner.offset or self.end > self.inner.end:
            raise ValueError("view exceeds its block")
        object.__setattr__(self, "exact", self.inner.exact)

    def value(self, pos):
        return self.inner.value(pos)

    def log_arrays(self, lo, hi):
        return self.inner.log_arrays(lo, hi)


# ---------------------------------------------------------------------------
# vectors


class SeqVector:
    """An element of l_p (``space="lp"``) or c_0 (``space="c0"``).

    ``horizon`` bounds the positions that may be read: entries at or past it
    are unknown (a stage-truncated construction), not zero.  ``generator``
    maps ``(lo, hi)`` to the blocks meeting ``[lo, hi)`` and makes the vector
    infinite; ``tail_bound(H, p)`` must then bound ``sum_{n>=H} |x_n|^p``
    (or ``sup_{n>=H} |x_n|`` for ``p = inf``).
    """

    def __init__(self, blocks: Iterable[Block] = (), *, generator: Callable | None = None,
                 tail_bound: Callable | None = None, horizon: int | None = None,
                 space: str = "lp", default_horizon: int | None = None, exact: bool | None = None,
                 name: str = ""):
        if space not in ("lp", "c0"):
            raise ValueError("space must be 'lp' or 'c0'")
        bl = sorted((b for b in blocks if b.length > 0), key=lambda b: b.offset)
        for a, b in zip(bl, bl[1:]):
            if b.offset < a.end:
                raise ValueError(f"blocks overlap at [{b.offset}, {a.end})")
        if generator is not None and bl:
            raise ValueError("give either static blocks or a generator")
        self.blocks = tuple(bl)
        self._starts = np.array([b.offset for b in bl], dtype=np.int64)
        self.generator = generator
        self.tail_bound = tail_bound
        self.horizon = horizon
        self.space = space
        self.default_horizon = default_horizon
        self.name = name
        if exact is None:
            exact = all(b.exact for b in bl) if generator is None else False
        self.exact = exact

    # constructors ----------------------------------------------------------

    @classmethod
    def from_values(cls, values: Sequence, offset: int = 0, **kw) -> "SeqVector":
        return cls([ValueBlock(offset, tuple(values))], **kw)

    @classmethod
    def unit(cls, k: int, exact: bool = True) -> "SeqVector":
        return cls.from_values([mpq(1) if exact else 1.0], offset=k)

    @classmethod
    def zero(cls) -> "SeqVector":
        return cls([], exact=True)

    # structure -------------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        """Finitely supported and fully known."""
        return self.generator is None and self.horizon is None

    @property
    def support_end(self) -> int | None:
        if self.generator is not None:
            return None
        return self.blocks[-1].end if self.blocks else 0

    def truncated(self) -> "SeqVector":
        """The same blocks read as a finitely supported vector (zeros past the last block)."""
        if self.generator is not None:
            raise ValueError("cannot truncate a generated vector; restrict it instead")
        return SeqVector(self.blocks, space=self.space, exact=self.exact, name=self.name)

    def _check(self, end: int) -> None:
        if self.horizon is not None and end > self.horizon:
            raise HorizonError(f"insufficient horizon: vector {self.name or 'x'} is known on "
                               f"[0, {self.horizon}), read up to {end}")

    def blocks_in(self, lo: int, hi: int) -> list[Block]:
        """Blocks meeting ``[lo, hi)``, in order."""
        if self.generator is not None:
            return [b for b in self.generator(lo, hi) if b.offset < hi and b.end > lo]
        i = max(int(np.searchsorted(self._starts, lo, side="right")) - 1, 0)
        out = []
        for b in self.blocks[i:]:
            if b.offset >= hi:
                break
            if b.end > lo:
                out.append(b)
        return out

    # reading ---------------------------------------------------------------

    def _zero(self):
        return mpq(0) if self.exact else 0.0

    def value(self, n: int):
        self._check(n + 1)
        for b in self.blocks_in(n, n + 1):
            return b.value(n)
        return self._zero()

    def materialize(self, L: int) -> list:
        """x_0, ..., x_{L-1}."""
        self._check(L)
        out = [self._zero()] * L
        for b in self.blocks_in(0, L):
            lo, hi = max(b.offset, 0), min(b.end, L)
            out[lo:hi] = b.values(lo, hi)
        return out

    def log_range(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """(sign int8, log|x_n| float64) for n in ``[lo, hi)``; zeros have sign 0."""
        if lo < 0:
            raise ValueError("negative position")
        self._check(hi)
        sign = np.zeros(hi - lo, dtype=np.int8)
        logs = np.full(hi - lo, -np.inf)
        for b in self.blocks_in(lo, hi):
            a, c = max(b.offset, lo), min(b.end, hi)
            s, g = b.log_arrays(a, c)
            sign[a - lo:c - lo] = s
            logs[a - lo:c - lo] = g
        return sign, logs

    def log_arrays(self, L: int) -> tuple[np.ndarray, np.ndarray]:
        return self.log_range(0, L)

    def floats(self, L: int) -> np.ndarray:
        sign, logs = self.log_arrays(L)
        with np.errstate(under="ignore"):
            return np.where(sign == 0, 0.0, sign * np.exp(logs))

    def support(self, L: int | None = None) -> list[tuple[int, int]]:
        """Half-open intervals covered by blocks (possibly containing zero entries)."""
        if L is None:
            if self.generator is not None:
                raise HorizonError("generated vector: pass a length")
            L = self.support_end
        return [(max(b.offset, 0), min(b.end, L)) for b in self.blocks_in(0, L)]

    def __repr__(self) -> str:
        kind = "generated" if self.generator is not None else f"{len(self.blocks)} blocks"
        return f"SeqVector<{self.name or kind}, {'exact' if self.exact else 'float'}>"


@dataclass(frozen=True)
class Cylinder:
    """{x : |x_j - s_j| < radius for all j <= k} (open, strict)."""

    centers: tuple
    radius: object

    def __post_init__(self):
        if not self.centers:
            raise ValueError("a cylinder constrains at least coordinate 0")
        if self.radius <= 0:
            raise ValueError("cylinder radius must be positive")

    @classmethod
    def around(cls, target: SeqVector | Sequence, k: int, radius) -> "Cylinder":
        vals = target.materialize(k + 1) if isinstance(target, SeqVector) else list(target)
        vals = (vals + [0] * (k + 1))[: k + 1]
        return cls(tuple(vals), radius)

    @property
    def k(self) -> int:
        return len(self.centers) - 1

    def float_centers(self) -> np.ndarray:
        return np.array([float(c) for c in self.centers], dtype=np.float64)

    def contains(self, coords: Sequence) -> bool:
        return all(abs(c - s) < self.radius for c, s in zip(coords, self.centers, strict=True))


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormEstimate:
    value: float
    lower: float
    upper: float
    exact_pow: object = None  # ||x||_p^p as mpq when exactly known

    @property
    def certified(self) -> bool:
        return math.isfinite(self.upper)


def _lse(a: np.ndarray) -> float:
    a = a[np.isfinite(a)]
    if a.size == 0:
        return -math.inf
    m = float(a.max())
    return m + math.log(math.fsum(np.exp(a - m)))


def _log_pow_sum(x: SeqVector, p: float, hi: int) -> float:
    """log sum_{n<hi} |x_n|^p, accumulated block by block."""
    parts = []
    for b in x.blocks_in(0, hi):
        a, c = max(b.offset, 0), min(b.end, hi)
        step = 1 << 20
        for s in range(a, c, step):
            _, logs = b.log_arrays(s, min(s + step, c))
            parts.append(_lse(p * logs))
    return _lse(np.array(parts)) if parts else -math.inf


def _log_max(x: SeqVector, hi: int) -> float:
    best = -math.inf
    for b in x.blocks_in(0, hi):
        _, logs = b.log_arrays(max(b.offset, 0), min(b.end, hi))
        if logs.size:
            best = max(best, float(logs.max()))
    return best


def p_norm_pow(x: SeqVector, p: int):
    """||x||_p^p exactly, for exact finitely supported x and integer p."""
    if not (x.exact and x.is_finite):
        raise CertificateError("exact p-norm needs an exact, finitely supported vector")
    if int(p) != p or p < 1:
        raise ValueError("exact p-norm needs an integer p >= 1")
    total = mpq(0)
    for b in x.blocks:
        for v in b.values(b.offset, b.end):
            total += abs(v) ** int(p)
    return total


def norm_estimate(x: SeqVector, p: float, horizon: int | None = None) -> NormEstimate:
    """||x||_p (``p = math.inf`` for the sup norm) with a certified interval."""
    if p != math.inf and p < 1:
        raise ValueError("p must lie in [1, inf]")
    if x.is_finite:
        end = x.support_end
        if p == math.inf:
            v = math.exp(_log_max(x, end))
            return NormEstimate(v, v, v)
        exact = None
        if x.exact and int(p) == p and end <= 1 << 16:
            exact = p_norm_pow(x, int(p))
            v = float(exact) ** (1.0 / p)
        else:
            v = math.exp(_log_pow_sum(x, p, end) / p)
        return NormEstimate(v, v, v, exact)
    if x.tail_bound is None:
        raise CertificateError(f"vector {x.name or 'x'} has no finite-norm certificate")
    H = horizon if horizon is not None else x.default_horizon
    if H is None:
        raise CertificateError("infinite vector without an evaluation horizon")
    x._check(H)
    tail = float(x.tail_bound(H, p))
    if p == math.inf:
        head = math.exp(_log_max(x, H))
        return NormEstimate(max(head, 0.0), head, max(head, tail))
    head = math.exp(_log_pow_sum(x, p, H))
    return NormEstimate((head + tail / 2) ** (1 / p), head ** (1 / p), (head + tail) ** (1 / p))


def p_norm(x: SeqVector, p: float, horizon: int | None = None) -> float:
    return norm_estimate(x, p, horizon).value


def sup_norm(x: SeqVector, horizon: int | None = None) -> float:
    return norm_estimate(x, math.inf, horizon).value


# ---------------------------------------------------------------------------
# derived vectors


def _intervals(S) -> list[tuple[int, int]]:
    """Merge half-open intervals, or runs of a set of positions."""
    if S and isinstance(next(iter(S)), tuple):
        ivs = sorted(S)
    else:
        pts = np.unique(np.asarray(list(S), dtype=np.int64))
        if pts.size == 0:
            return []
        cut = np.flatnonzero(np.diff(pts) != 1) + 1
        ivs = [(int(r[0]), int(r[-1]) + 1) for r in np.split(pts, cut)]
    merged: list[list[int]] = []
    for a, b in ivs:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        elif b > a:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def restrict(x: SeqVector, S) -> SeqVector:
    """x restricted to S (positions, or half-open ``(lo, hi)`` intervals); finite result."""
    views = []
    for lo, hi in _intervals(S):
        x._check(hi)
        for b in x.blocks_in(lo, hi):
            a, c = max(b.offset, lo), min(b.end, hi)
            inner = b.inner if isinstance(b, ViewBlock) else b
            views.append(ViewBlock(a, c - a, inner))
    return SeqVector(views, space=x.space, exact=x.exact if x.generator is None else None,
                     name=f"{x.name or 'x'}|S")


def combine(terms: Sequence[tuple[object, SeqVector]]) -> SeqVector:
    """sum a_i x_i for finitely supported vectors, materialized into one block."""
    if not all(x.is_finite for _, x in terms):
        raise ValueError("combine needs finitely supported vectors")
    L = max((x.support_end for _, x in terms), default=0)
    exact = all(x.exact and is_exact_value(a) for a, x in terms)
    acc = [mpq(0) if exact else 0.0] * L
    for a, x in terms:
        for i, v in enumerate(x.materialize(L)):
            acc[i] += a * v
    return SeqVector.from_values(acc)
