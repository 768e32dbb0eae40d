"""A pointwise Z-hypercyclic vector for a shift that is not norm Z-hypercyclic.

The weights are ``FRatio(p)``.  Block ``i`` lives on
``J_i = [n_i!, n_i! (1 + n_i / 2**h(i))]`` and tiles rescaled copies of the
target ``s^(h(i))``.  At the literal indices only exact arithmetic is
possible, so the plan is kept symbolic (``NEIndexPlan``) while vectors are
materialized along a scaled plan whose blocks keep the ratio
``len / start = n / 2**h`` at tractable sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..ideals import NatSet
from ..sequences import Cylinder, RescaledBlock, SeqVector
from ..shifts import orbit_visits
from ..weights import FRatio, WeightSequence
from .bigfact import FactorialAffine
from .targets import TargetEnumeration

__all__ = [
    "PlanBudgetError",
    "nu2_rule",
    "default_growth",
    "NEPlanEntry",
    "NEIndexPlan",
    "ne_index_plan",
    "ne_norm_chain",
    "ScaledBlock",
    "ScaledPlan",
    "default_scaled_plan",
    "ne_vector_scaled",
    "ne_visit_report",
]

I_MAX_LITERAL = 4


class PlanBudgetError(ValueError):
    pass


def nu2_rule(i: int) -> int:
    """2-adic valuation of i + 1; every fiber is infinite."""
    return ((i + 1) & -(i + 1)).bit_length() - 1


def default_growth(i: int, m: int) -> int:
    return 3 ** (2 ** i * (m + 3) ** 2)


@dataclass(frozen=True)
class NEPlanEntry:
    i: int
    h: int
    m: int                    # m_{h(i)}, smallest positive support bound of s^(h(i))
    n: int
    J_lo: FactorialAffine     # n!
    J_hi: FactorialAffine     # n! (1 + n / 2^h), an integer since 2^h <= n
    size: FactorialAffine     # |J_i|
    r: FactorialAffine
    q: int

    def to_dict(self) -> dict:
        return {"i": self.i, "h": self.h, "m": self.m, "n": str(self.n),
                "J_lo": str(self.J_lo), "J_hi": str(self.J_hi), "size": str(self.size),
                "r": str(self.r), "q": self.q}


@dataclass
class NEIndexPlan:
    entries: list[NEPlanEntry]
    p: float

    def __getitem__(self, i: int) -> NEPlanEntry:
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> list[int]:
        return [e.n for e in self.entries]

    def check(self) -> dict:
        """Exact structural assertions: monotone n, remainders, sizes, disjointness."""
        out = {"n_increasing": all(a.n < b.n for a, b in zip(self.entries, self.entries[1:])),
               "q_below_m": all(0 <= e.q < e.m for e in self.entries),
               "size_identity": all(e.r.scale(e.m) + e.q == e.size for e in self.entries),
               "size_formula": all(e.J_hi - e.J_lo + 1 == e.size for e in self.entries),
               "disjoint": all(b.J_lo > a.J_hi for a, b in zip(self.entries, self.entries[1:]))}
        out["ok"] = all(out.values())
        return out

    def to_dict(self) -> dict:
        return {"p": self.p, "entries": [e.to_dict() for e in self.entries], "checks": self.check()}


def ne_index_plan(i_max: int, h: Callable[[int], int] = nu2_rule,
                  targets: TargetEnumeration | None = None, p: float = 2,
                  growth: Callable[[int, int], int] = default_growth) -> NEIndexPlan:
    """n_i = 1 + max(n_{i-1}, 2^h m, growth(i, m)) and the blocks J_i for i <= i_max.

    ``growth`` defaults to ``3^(2^i (m+3)^2)``; smaller rules give plans whose
    factorials can be checked by direct computation.
    """
    if i_max > I_MAX_LITERAL and growth is default_growth:
        raise PlanBudgetError("literal plan exceeds big-integer budget")
    if i_max < 0:
        raise ValueError("i_max must be a natural number")
    targets = targets or TargetEnumeration("ne_rescaled", p)
    entries, prev = [], 0
    for i in range(i_max + 1):
        hi = h(i)
        m = targets.m_positive(hi)
        n = 1 + max(prev, 2 ** hi * m, growth(i, m))
        lo = FactorialAffine(n)
        top = FactorialAffine(n, Fraction(n + 2 ** hi, 2 ** hi))
        size = FactorialAffine(n, Fraction(n, 2 ** hi), 1)
        q = size % m
        entries.append(NEPlanEntry(i, hi, m, n, lo, top, size, size.floordiv(m), q))
        prev = n
    return NEIndexPlan(entries, p)


def ne_norm_chain(plan: NEIndexPlan, targets: TargetEnumeration | None = None) -> list[dict]:
    """The bound on ||z||_p^p block by block, each link checked.

    Block i contributes at most ``(n+1)/n (m+2) log(m+2) / log(n/3)`` (the
    ``+1`` in |J_i| costs the factor (n+1)/n), then ``(m+2)^2 / log(n/3)``,
    then ``2^-i``; summing gives ``||z||_p^p <= 2``.  Logarithms of the big
    n are taken in binary64 with a relative margin.
    """
    targets = targets or TargetEnumeration("ne_rescaled", plan.p)
    rows = []
    for e in plan.entries:
        s = targets(e.h)
        relabel_ok = all(_relabel_ok(v, plan.p, e.h) for v in s)
        log_n3 = math.log(e.n) - math.log(3)
        first = (e.n + 1) / e.n * (e.m + 2) * math.log(e.m + 2) / log_n3
        second = (e.m + 2) ** 2 / log_n3
        third = 2.0 ** -e.i
        margin = 1 + 1e-9
        rows.append({"i": e.i, "relabel_bound": relabel_ok, "block_bound": first,
                     "square_bound": second, "geometric": third,
                     "ok": relabel_ok and first <= second * margin and second <= third * margin})
    return rows


def _relabel_ok(v, p: float, h: int) -> bool:
    """|v|^p <= 2^h, exactly for integral p."""
    if int(p) == p:
        return abs(Fraction(v)) ** int(p) <= 2 ** h
    return abs(float(v)) ** p <= 2.0 ** h


# ---------------------------------------------------------------------------
# scaled plan


@dataclass(frozen=True)
class ScaledBlock:
    h: int
    start: int
    length: int
    m: int

    @property
    def end(self) -> int:          # last index of the block, inclusive
        return self.start + self.length - 1

    @property
    def r(self) -> int:
        return self.length // self.m

    @property
    def q(self) -> int:
        return self.length - self.r * self.m


@dataclass
class ScaledPlan:
    blocks: list[ScaledBlock]

    def validate(self) -> None:
        for a, b in zip(self.blocks, self.blocks[1:]):
            if b.start <= a.end:
                raise ValueError(f"schedule overlap: block at {b.start} starts inside [{a.start}, {a.end}]")
        for b in self.blocks:
            if b.start < b.m or b.length < b.m:
                raise ValueError(f"block at {b.start} is shorter than its target or starts too early")

    def to_dict(self) -> dict:
        return {"blocks": [{"h": b.h, "start": b.start, "length": b.length, "m": b.m,
                            "r": b.r, "q": b.q} for b in self.blocks]}


def default_scaled_plan(targets: TargetEnumeration, blocks: Sequence[tuple[int, int]] | None = None,
                        start: int = 4) -> ScaledPlan:
    """Blocks ``[a, a(1 + ratio)]`` back to back, ``ratio`` standing in for n / 2^h."""
    layout = blocks or [(0, 24), (1, 24), (2, 24), (3, 12)]
    blocks, a = [], start
    for h, ratio in layout:
        length = a * ratio + 1
        blocks.append(ScaledBlock(h, a, length, targets.m_positive(h)))
        a += length
    return ScaledPlan(blocks)


def ne_vector_scaled(p: float, plan: ScaledPlan, targets: TargetEnumeration | None = None,
                     weights: WeightSequence | None = None) -> SeqVector:
    """Tiles ``s^(h)_l / (w_{l+1} ... w_pos)`` over each block, zeros elsewhere."""
    plan.validate()
    targets = targets or TargetEnumeration("ne_rescaled", p)
    w = weights or FRatio(p)
    blocks = []
    for b in plan.blocks:
        base = targets.padded(b.h, b.m)
        if b.r:
            blocks.append(RescaledBlock(b.start, b.r * b.m, base, w, tile=b.m))
    return SeqVector(blocks, space="lp", name="ne-scaled")


def ne_visit_report(w: WeightSequence, z: SeqVector, plan: ScaledPlan, targets: TargetEnumeration,
                    j: int, N: int, radius=Fraction(1, 1024)) -> dict:
    """Upper density of visits to the cylinder of s^(j) on coordinates < m_j.

    Measured as the largest mu_n over the block ends of blocks with h = j,
    against the target value 1 / m_j.
    """
    m = targets.m_positive(j)
    U = Cylinder.around(targets.padded(j, m), m - 1, radius)
    visits: NatSet = orbit_visits(w, z, U, N)
    counts = np.cumsum(visits.indicator(N), dtype=np.int64)
    witnesses = [b.end for b in plan.blocks if b.h == j and b.end <= N]
    measured = max((Fraction(int(counts[n]), n + 1) for n in witnesses), default=None)
    return {"j": j, "m": m, "horizon": N, "witnesses": witnesses, "upper_density": measured,
            "target": Fraction(1, m)}
