"""Ideals on the naturals, lower semicontinuous submeasures and densities.

Everything here works at a finite horizon ``N``: sets are queried on
``[0, N]`` only, and ideal membership comes back as one of three verdicts
(``InIdeal``, ``Positive``, ``Undecided``) instead of a guessed boolean.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "HorizonError",
    "NatSet",
    "Lscsm",
    "Cardinality",
    "DensitySup",
    "DyadicSup",
    "Harmonic",
    "MuN",
    "GeneratedLscsm",
    "IdealSpec",
    "Verdict",
    "DensityTrace",
    "mu_n",
    "density_trace",
    "upper_density_estimate",
    "lower_density_estimate",
    "log_density_estimate",
    "exhaustive_norm_estimate",
    "in_ideal_at_horizon",
    "tail_window",
]

# comparison slack for binary64 submeasure values
FLOAT_SLACK = 1e-12


class HorizonError(ValueError):
    """A set or vector was queried beyond the range it is known on."""


class NatSet:
    """A subset of the naturals, known on ``[0, horizon]``.

    Either an explicit sorted array of elements or a membership rule.  A
    ``horizon`` of ``None`` means membership is known for every ``n`` (a
    genuinely finite explicit set, or a closed-form rule).
    """

    __slots__ = ("_elements", "_scalar", "_vector", "horizon", "name")

    def __init__(self, *, elements=None, scalar=None, vector=None, horizon=None, name=""):
        if elements is None and scalar is None and vector is None:
            raise ValueError("NatSet needs elements or a membership rule")
        if elements is not None:
            arr = np.unique(np.asarray(list(elements) if not isinstance(elements, np.ndarray) else elements,
                                       dtype=np.int64))
            if arr.size and arr[0] < 0:
                raise ValueError("NatSet elements must be natural numbers")
            if horizon is not None and arr.size and arr[-1] > horizon:
                raise ValueError("explicit elements exceed the declared horizon")
            arr.setflags(write=False)
            self._elements = arr
        else:
            self._elements = None
        self._scalar = scalar
        self._vector = vector
        self.horizon = horizon
        self.name = name or ("explicit" if elements is not None else "rule")

    # construction helpers -------------------------------------------------

    @classmethod
    def explicit(cls, elements: Iterable[int], horizon: int | None = None, name: str = "") -> "NatSet":
        return cls(elements=elements, horizon=horizon, name=name or "explicit")

    @classmethod
    def from_mask(cls, mask, name: str = "") -> "NatSet":
        """Explicit set from a 0/1 indicator of ``[0, len(mask))``; known only there."""
        mask = np.asarray(mask)
        return cls(elements=np.flatnonzero(mask), horizon=len(mask) - 1, name=name or "mask")

    @classmethod
    def rule(cls, scalar: Callable[[int], bool], vector: Callable[[int], np.ndarray] | None = None,
             name: str = "rule", horizon: int | None = None) -> "NatSet":
        return cls(scalar=scalar, vector=vector, horizon=horizon, name=name)

    # queries --------------------------------------------------------------

    @property
    def is_explicit(self) -> bool:
        return self._elements is not None

    @property
    def is_finite(self) -> bool:
        return self._elements is not None and self.horizon is None

    def _check(self, N: int) -> None:
        if N < 0:
            raise ValueError("horizon must be a natural number")
        if self.horizon is not None and N > self.horizon:
            raise HorizonError(f"insufficient horizon: set {self.name!r} known up to "
                               f"{self.horizon}, queried at {N}")

    def __contains__(self, n: int) -> bool:
        self._check(n)
        if self._elements is not None:
            i = np.searchsorted(self._elements, n)
            return bool(i < self._elements.size and self._elements[i] == n)
        return bool(self._scalar(n))

    def indicator(self, N: int) -> np.ndarray:
        """0/1 array of length ``N + 1``."""
        self._check(N)
        if self._elements is not None:
            out = np.zeros(N + 1, dtype=np.uint8)
            out[self._elements[self._elements <= N]] = 1
            return out
        if self._vector is not None:
            return np.asarray(self._vector(N), dtype=np.uint8)[: N + 1]
        return np.fromiter((1 if self._scalar(n) else 0 for n in range(N + 1)), dtype=np.uint8, count=N + 1)

    def elements(self, N: int | None = None) -> np.ndarray:
        """Sorted elements in ``[0, N]`` (all of them for a finite explicit set)."""
        if N is None:
            if not self.is_finite:
                raise HorizonError(f"set {self.name!r} is not known to be finite; pass a horizon")
            return self._elements
        self._check(N)
        if self._elements is not None:
            return self._elements[: np.searchsorted(self._elements, N, side="right")]
        return np.flatnonzero(self.indicator(N)).astype(np.int64)

    def count(self, N: int) -> int:
        return int(self.elements(N).size)

    def restrict(self, N: int) -> "NatSet":
        return NatSet.explicit(self.elements(N), horizon=N, name=f"{self.name}|{N}")

    def __repr__(self) -> str:
        h = "inf" if self.horizon is None else self.horizon
        if self._elements is not None and self._elements.size <= 8:
            return f"NatSet({list(map(int, self._elements))}, horizon={h})"
        return f"NatSet<{self.name}, horizon={h}>"


def _as_array(S) -> np.ndarray:
    if isinstance(S, NatSet):
        return S.elements()
    return np.unique(np.asarray(list(S), dtype=np.int64))


# ---------------------------------------------------------------------------
# submeasures


class Lscsm:
    """Lower semicontinuous submeasure, evaluated on finite sets."""

    name = "lscsm"

    def __call__(self, S) -> Fraction | int | float:
        arr = _as_array(S)
        if arr.size == 0:
            return 0
        return self.evaluate(arr)

    def evaluate(self, arr: np.ndarray):  # arr sorted, unique, nonempty
        raise NotImplementedError

    def __repr__(self) -> str:
        return self.name


def _max_ratio(nums: Sequence[int], dens: Sequence[int]) -> Fraction:
    nums = np.asarray(nums, dtype=np.int64)
    dens = np.asarray(dens, dtype=np.int64)
    ratio = nums / dens
    top = ratio.max()
    cand = np.flatnonzero(ratio >= top - 1e-9 * top)
    return max(Fraction(int(nums[i]), int(dens[i])) for i in cand)


class Cardinality(Lscsm):
    """phi(S) = |S|; Fin(phi) is Fin."""

    name = "cardinality"

    def evaluate(self, arr):
        return int(arr.size)


class DensitySup(Lscsm):
    """phi(S) = sup_n |S cap [0,n]| / (n+1); Exh(phi) is the density zero ideal."""

    name = "density-sup"

    def evaluate(self, arr):
        # the sup over n is attained at an element of S
        return _max_ratio(np.arange(1, arr.size + 1), arr + 1)


class DyadicSup(Lscsm):
    """nu(S) = sup_n |S cap [2^n, 2^{n+1})| / 2^n."""

    name = "dyadic-sup"

    def evaluate(self, arr):
        arr = arr[arr >= 1]
        if arr.size == 0:
            return 0
        exps = np.floor(np.log2(arr.astype(np.float64))).astype(np.int64)
        # repair float rounding of log2 near powers of two
        exps -= (np.left_shift(np.int64(1), exps) > arr).astype(np.int64)
        exps += (np.left_shift(np.int64(1), exps + 1) <= arr).astype(np.int64)
        blocks, counts = np.unique(exps, return_counts=True)
        return max(Fraction(int(c), 1 << int(b)) for b, c in zip(blocks, counts))


class Harmonic(Lscsm):
    """phi(S) = sum_{n in S} 1/(n+1); Fin(phi) is the summable ideal."""

    name = "harmonic"

    def __init__(self, exact: bool = False):
        self.exact = exact

    def evaluate(self, arr):
        if self.exact:
            return sum((Fraction(1, int(n) + 1) for n in arr), Fraction(0))
        return math.fsum(1.0 / (arr.astype(np.float64) + 1.0))


class MuN(Lscsm):
    """mu_n(S) = |S cap [0,n]| / (n+1) for a fixed n."""

    def __init__(self, n: int):
        self.n = n
        self.name = f"mu_{n}"

    def evaluate(self, arr):
        return Fraction(int(np.searchsorted(arr, self.n, side="right")), self.n + 1)


class GeneratedLscsm(Lscsm):
    """Submeasure whose Fin-ideal is generated by ``generators`` (and Fin).

    phi(F) is the least k with F contained in [0, k) union G_0 ... G_{k-1}.
    """

    name = "generated"

    def __init__(self, generators: Sequence[NatSet]):
        if not generators:
            raise ValueError("a countably generated ideal needs at least one generator")
        self.generators = tuple(generators)

    def evaluate(self, arr):
        worst = 0
        for a in arr:
            a = int(a)
            need = a + 1
            for j, g in enumerate(self.generators[: need - 1]):
                if a in g:
                    need = j + 1
                    break
            worst = max(worst, need)
        return worst


# ---------------------------------------------------------------------------
# densities


def mu_n(S: NatSet, n: int) -> Fraction:
    """|S cap [0, n]| / (n + 1), exactly."""
    return Fraction(S.count(n), n + 1)


def tail_window(N: int) -> tuple[int, int]:
    return (N + 1) // 2, N


@dataclass(frozen=True)
class DensityTrace:
    horizon: int
    counts: np.ndarray = field(repr=False)  # counts[n] = |S cap [0, n]|
    running_sup: Fraction
    running_inf_tail: Fraction
    window: tuple[int, int]

    def mu(self, n: int) -> Fraction:
        return Fraction(int(self.counts[n]), n + 1)

    @property
    def values(self) -> np.ndarray:
        return self.counts / np.arange(1, self.horizon + 2)


def _counts(S: NatSet, N: int) -> np.ndarray:
    return np.cumsum(S.indicator(N), dtype=np.int64)


def density_trace(S: NatSet, N: int) -> DensityTrace:
    """mu_0..mu_N of S with the overall sup and the tail-window inf."""
    counts = _counts(S, N)
    best, _ = _kernels.window_extrema(counts, 0, N)
    lo, hi = tail_window(N)
    _, worst = _kernels.window_extrema(counts, lo, hi)
    return DensityTrace(N, counts, Fraction(int(counts[best]), best + 1),
                        Fraction(int(counts[worst]), worst + 1), (lo, hi))


def _window_extrema(S: NatSet, N: int) -> tuple[Fraction, Fraction]:
    if N < 2:
        raise ValueError("density estimates need a horizon N >= 2")
    counts = _counts(S, N)
    lo, hi = tail_window(N)
    a, b = _kernels.window_extrema(counts, lo, hi)
    return Fraction(int(counts[a]), a + 1), Fraction(int(counts[b]), b + 1)


def upper_density_estimate(S: NatSet, N: int) -> Fraction:
    """max of mu_n(S) over the tail window [ceil(N/2), N]."""
    return _window_extrema(S, N)[0]


def lower_density_estimate(S: NatSet, N: int) -> Fraction:
    """min of mu_n(S) over the tail window [ceil(N/2), N]."""
    return _window_extrema(S, N)[1]


def log_density_estimate(S: NatSet, N: int) -> float:
    """max over the tail window of sum_{k in S, 1<=k<=n} 1/k divided by H_n."""
    if N < 2:
        raise ValueError("density estimates need a horizon N >= 2")
    ind = S.indicator(N).astype(np.float64)
    k = np.arange(N + 1, dtype=np.float64)
    k[0] = np.inf  # 0 carries no logarithmic weight
    num = np.cumsum(ind / k)
    den = np.cumsum(1.0 / k)
    lo, hi = tail_window(N)
    return float(np.max(num[lo:hi + 1] / den[lo:hi + 1]))


def exhaustive_norm_estimate(phi: Lscsm, S: NatSet, m: int, N: int):
    """phi((S minus [0, m]) cap [0, N]); nonincreasing in the cut ``m``."""
    if m > N:
        raise ValueError("cut m must not exceed the horizon N")
    arr = S.elements(N)
    return phi(arr[arr > m])


# ---------------------------------------------------------------------------
# ideals


class Verdict(str, enum.Enum):
    IN_IDEAL = "InIdeal"
    POSITIVE = "Positive"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class IdealSpec:
    kind: str
    generators: tuple = ()
    lscsm: Lscsm | None = None

    KINDS = ("Fin", "DensityZero", "LogDensityZero", "Summable",
             "CountablyGenerated", "FromLscsmFin", "FromLscsmExh")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown ideal kind {self.kind!r}")
        if self.kind == "CountablyGenerated" and not self.generators:
            raise ValueError("CountablyGenerated needs at least one generator")
        if self.kind.startswith("FromLscsm") and self.lscsm is None:
            raise ValueError(f"{self.kind} needs a submeasure")

    @classmethod
    def fin(cls):
        return cls("Fin")

    @classmethod
    def density_zero(cls):
        return cls("DensityZero")

    @classmethod
    def log_density_zero(cls):
        return cls("LogDensityZero")

    @classmethod
    def summable(cls):
        return cls("Summable")

    @classmethod
    def countably_generated(cls, generators: Sequence[NatSet]):
        return cls("CountablyGenerated", generators=tuple(generators))

    @classmethod
    def fin_of(cls, phi: Lscsm):
        return cls("FromLscsmFin", lscsm=phi)

    @classmethod
    def exh_of(cls, phi: Lscsm):
        return cls("FromLscsmExh", lscsm=phi)

    def submeasure(self) -> Lscsm:
        """A submeasure representing this ideal (as Fin(phi) or Exh(phi))."""
        if self.lscsm is not None:
            return self.lscsm
        return {
            "Fin": Cardinality,
            "DensityZero": DensitySup,
            "Summable": Harmonic,
        }.get(self.kind, lambda: GeneratedLscsm(self.generators))()

    @property
    def is_fsigma(self) -> bool:
        return self.kind in ("Fin", "Summable", "CountablyGenerated", "FromLscsmFin")


def _no_tail_growth(arr: np.ndarray, N: int) -> bool:
    return not np.any(arr > N // 2)


def in_ideal_at_horizon(ideal: IdealSpec, S: NatSet, N: int, delta) -> Verdict:
    """Finite-horizon surrogate for "S in I" versus "S in I+"."""
    if delta <= 0:
        raise ValueError("threshold delta must be positive")
    delta = Fraction(delta)
    kind = ideal.kind
    if kind == "DensityZero":
        d = upper_density_estimate(S, N)
        return _threshold(d, delta)
    if kind == "LogDensityZero":
        d = log_density_estimate(S, N)
        return _threshold(d, float(delta))
    if kind == "FromLscsmExh":
        val = exhaustive_norm_estimate(ideal.lscsm, S, N // 4, N)
        return _threshold(val, delta if not isinstance(val, float) else float(delta))

    arr = S.elements(N)
    if kind == "Fin":
        if arr.size > 1 / delta:
            return Verdict.POSITIVE
        return Verdict.IN_IDEAL if _no_tail_growth(arr, N) else Verdict.UNDECIDED
    if kind == "Summable":
        total = math.fsum(1.0 / (arr + 1.0))
        if total > 1 / delta:
            return Verdict.POSITIVE
        tail = arr[arr > N // 2]
        return Verdict.IN_IDEAL if math.fsum(1.0 / (tail + 1.0)) < delta else Verdict.UNDECIDED
    if kind == "CountablyGenerated":
        covered = np.zeros(arr.size, dtype=bool)
        for g in ideal.generators:
            covered |= g.indicator(N)[arr].astype(bool)
        outside = arr[~covered]
        if outside.size > 1 / delta:
            return Verdict.POSITIVE
        return Verdict.IN_IDEAL if _no_tail_growth(outside, N) else Verdict.UNDECIDED
    if kind == "FromLscsmFin":
        phi = ideal.lscsm
        val = phi(arr)
        if val > 1 / delta:
            return Verdict.POSITIVE
        return Verdict.IN_IDEAL if val == phi(arr[arr <= N // 2]) else Verdict.UNDECIDED
    raise AssertionError(kind)


def _threshold(value, delta) -> Verdict:
    if value >= delta:
        return Verdict.POSITIVE
    if value < delta / 2:
        return Verdict.IN_IDEAL
    return Verdict.UNDECIDED
