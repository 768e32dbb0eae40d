"""A frequently hypercyclic vector for shifts satisfying the Bayart-Ruzsa condition.

Positions are cut into slots of length ``P``.  Slot ``q`` carries target
``s = s^(a(q))`` as ``y_{qP+l} = s_l / (w_{1+l} ... w_{qP+l})`` followed by
zeros, so that ``T^{qP} y`` starts with ``s`` and then at least
``P - len(s)`` zeros.  The assignment ``a`` is either the ruler sequence
(target i on the slots with ``2**i || q+1``, the last target absorbing the
rest) or round robin.  Either way each target owns a set of slots of positive
lower density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from ..sequences import Block, SeqVector, _signlog
from ..shifts import Classification, bayart_ruzsa_report
from ..weights import WeightSequence
from .targets import TargetEnumeration

__all__ = ["FHCError", "FHCVector", "fhc_schedule", "SlotBlock"]


class FHCError(ValueError):
    pass


def _ruler(q: np.ndarray, T: int) -> np.ndarray:
    low = (q + 1) & -(q + 1)
    v = np.zeros(q.shape, dtype=np.int64)
    for b in range(1, T):
        v[low >= (1 << b)] = b
    return v


@dataclass(frozen=True, eq=False)
class SlotBlock(Block):
    """Slots ``q0 <= q < q1`` of an ``FHCVector``."""

    owner: "FHCVector"
    q0: int
    q1: int

    @property
    def offset(self) -> int:
        return self.q0 * self.owner.period

    @property
    def length(self) -> int:
        return (self.q1 - self.q0) * self.owner.period

    @property
    def exact(self) -> bool:
        return self.owner.exact

    def value(self, pos):
        o = self.owner
        q, l = divmod(pos, o.period)
        s = o.tables[o.assign(q)]
        if l >= len(s) or s[l] == 0:
            return mpq(0) if o.exact else 0.0
        return (s[l] if o.exact else float(s[l])) / o.weights.product(l + 1, pos)

    def log_arrays(self, lo, hi):
        o = self.owner
        pos = np.arange(lo, hi, dtype=np.int64)
        q, l = np.divmod(pos, o.period)
        idx = o.assign_array(q)
        inside = l < o.width
        lc = np.minimum(l, o.width - 1)
        sign = np.where(inside, o.sign_table[idx, lc], 0).astype(np.int8)
        C = o.weights.log_cumsum(hi)
        Ng = o.weights.neg_cumsum(hi)
        logs = o.log_table[idx, lc] - (C[pos + 1] - C[lc + 1])
        flip = ((Ng[pos + 1] - Ng[lc + 1]) & 1).astype(np.int8)
        sign = (sign * (1 - 2 * flip)).astype(np.int8)
        return sign, np.where(sign == 0, -np.inf, logs)


class FHCVector(SeqVector):
    def __init__(self, weights: WeightSequence, targets: list[tuple], period: int, assignment: str, p: float):
        self.weights = weights
        self.tables = targets
        self.period = period
        self.assignment = assignment
        self.T = len(targets)
        self.width = max(1, max(len(s) for s in targets))
        self.sign_table = np.zeros((self.T, self.width), dtype=np.int8)
        self.log_table = np.full((self.T, self.width), -np.inf)
        for i, s in enumerate(targets):
            sg, lg = _signlog(s)
            self.sign_table[i, : len(s)] = sg
            self.log_table[i, : len(s)] = lg
        exact = weights.exact
        super().__init__(generator=self._blocks, tail_bound=self._tail_bound, space="lp",
                         default_horizon=64 * period * self.T, exact=exact, name="fhc")
        self.p = p

    def assign(self, q: int) -> int:
        if self.assignment == "round_robin":
            return q % self.T
        return min(((q + 1) & -(q + 1)).bit_length() - 1, self.T - 1)

    def assign_array(self, q: np.ndarray) -> np.ndarray:
        if self.assignment == "round_robin":
            return q % self.T
        return _ruler(q, self.T)

    def _blocks(self, lo: int, hi: int):
        P = self.period
        return [SlotBlock(self, lo // P, (hi - 1) // P + 1)] if hi > lo else []

    def _tail_bound(self, H: int, p: float) -> float:
        """Bound on sum_{n >= H} |y_n|^p (or sup_{n >= H} |y_n| for p = inf).

        Uses |w_{1+l} ... w_{qP+l}| = |w_{1+l} ... w_{q0 P+l}| * |lam|^{(q-q0)P}
        once ``q0 P`` is past the explicit part of the weights.
        """
        lam = self.weights.tail_constant()
        if lam is None or abs(float(lam)) <= 1:
            return math.inf
        P = self.period
        start = getattr(self.weights, "values", ())
        q0 = max(H // P, -(-len(start) // P))
        head = 0.0
        if q0 * P > H:
            s, g = self.log_range(H, q0 * P)
            head = float(np.max(np.exp(g))) if p == math.inf else math.fsum(np.exp(p * g[s != 0]))
        C = self.weights.log_cumsum(q0 * P + self.width + 1)
        worst = 0.0
        for i in range(self.T):
            mags = [math.exp(self.log_table[i, l] - (C[q0 * P + l + 1] - C[l + 1]))
                    for l in range(self.width) if self.sign_table[i, l] != 0]
            if mags:
                worst = max(worst, max(mags) if p == math.inf else math.fsum(m ** p for m in mags))
        if p == math.inf:
            return max(head, worst)
        ratio = abs(float(lam)) ** (-p * P)
        return head + worst / (1 - ratio)

    def slot_density(self, i: int) -> Fraction:
        """Asymptotic density of slot starts carrying target i."""
        P = self.period
        if self.assignment == "round_robin":
            return Fraction(1, P * self.T)
        if i < self.T - 1:
            return Fraction(1, P * 2 ** (i + 1))
        return Fraction(1, P * 2 ** (self.T - 1))

    def density_bound(self, i: int) -> tuple[Fraction, int]:
        """(c_i, N_min): every mu_n of the slot starts of target i with
        ``n >= N_min / 2`` is at least ``c_i``."""
        P = self.period
        if self.assignment == "round_robin":
            return Fraction(1, 2 * P * self.T), 4 * P * self.T
        if i < self.T - 1:
            return Fraction(1, P * 2 ** (i + 2)), P * 2 ** (i + 2)
        return Fraction(1, P * 2 ** self.T), P * 2 ** (self.T + 1)

    def slot_starts(self, i: int, N: int) -> np.ndarray:
        q = np.arange(N // self.period + 1)
        return (q[self.assign_array(q) == i] * self.period).astype(np.int64)


def fhc_schedule(targets: TargetEnumeration, w: WeightSequence, p: float = 2, T: int = 3,
                 k_max: int = 0, assignment: str = "ruler", check_horizon: int = 10_000) -> FHCVector:
    """y placing rescaled copies of s^(0), ..., s^(T-1) on disjoint slot families.

    ``k_max`` is the largest coordinate index any cylinder will constrain;
    slots are long enough that those coordinates read zero padding.
    """
    report = bayart_ruzsa_report(w, p, check_horizon)
    if report.classification is not Classification.CONVERGENT:
        raise FHCError(f"no FHC certificate: Bayart-Ruzsa classification is "
                       f"{report.classification.value} for {w.describe()}")
    if assignment not in ("ruler", "round_robin"):
        raise ValueError(f"unknown slot assignment {assignment!r}")
    if T < 1:
        raise ValueError("need at least one target")
    tabs = [targets(i) for i in range(T)]
    period = max(max(len(s) for s in tabs), k_max + 1, 1)
    return FHCVector(w, tabs, period, assignment, p)
