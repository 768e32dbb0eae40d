"""The reduction x -> f(x) from Delta into l_p and its finite-stage checks.

Stage t of f(x) is ``0^{(x_t+1) mh_t}`` followed by the block
``y_n / (w_{n+1} ... w_pos)`` for ``n in [alpha_{t-1}, alpha_t)``, where
``pos`` is the position the entry lands on.  Stage sizes ``m_t`` depend only
on the visit statistics of y, never on x, so points sharing a prefix share
the corresponding stages.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from gmpy2 import mpq

from ..cantor import BairePoint, BaireRule, agree_prefix, delta_check
from ..ideals import HorizonError, NatSet, lower_density_estimate
from ..sequences import Cylinder, RescaledBlock, SeqVector, combine, p_norm_pow, restrict
from ..shifts import orbit_visits, shift_apply
from ..weights import Constant, Explicit, FRatio, WeightSequence
from .targets import TargetEnumeration

__all__ = [
    "cantor_pair",
    "cantor_unpair",
    "VisitStats",
    "TMSchedule",
    "PreconditionError",
    "tm_build_schedule",
    "tm_f",
    "tm_iota",
    "tm_claim_equivalence_check",
    "admissible_pairs",
    "tm_visit_density_report",
    "tm_zero_density_check",
    "tm_norm_check",
    "tm_continuity_check",
]


class PreconditionError(ValueError):
    """A check was asked outside the range where its statement applies."""


def cantor_pair(i: int, j: int) -> int:
    return (i + j) * (i + j + 1) // 2 + j


def cantor_unpair(t: int) -> tuple[int, int]:
    s = (math.isqrt(8 * t + 1) - 1) // 2
    j = t - s * (s + 1) // 2
    return s - j, j


def default_eps(t: int) -> Fraction:
    return Fraction(1, 2 ** (t + 1))


class VisitStats:
    """Visit sets S_t = {n <= H : T^n y in V_t} with V_t the cylinder around
    s^(i) of radius 2^-j on coordinates 0..k_t, where (i, j) = unpair(t) and
    k_t = max_{t' <= t} m_{i(t')}."""

    def __init__(self, w: WeightSequence, y: SeqVector, targets: TargetEnumeration, horizon: int):
        if horizon < 2:
            raise ValueError("horizon must be at least 2")
        self.w = w
        self.y = y
        self.targets = targets
        self.horizon = horizon
        self._visits: dict[int, NatSet] = {}
        self._counts: dict[int, np.ndarray] = {}
        self._density: dict[int, Fraction] = {}
        self._k: list[int] = []

    def k(self, t: int) -> int:
        while len(self._k) <= t:
            s = len(self._k)
            m = self.targets.m_positive(cantor_unpair(s)[0])
            self._k.append(max(m, self._k[-1] if self._k else 0))
        return self._k[t]

    def cylinder(self, t: int) -> Cylinder:
        i, j = cantor_unpair(t)
        return Cylinder(self.targets.padded(i, self.k(t) + 1), mpq(1, 2 ** j))

    def visits(self, t: int) -> NatSet:
        if t not in self._visits:
            self._visits[t] = orbit_visits(self.w, self.y, self.cylinder(t), self.horizon)
        return self._visits[t]

    def counts(self, t: int) -> np.ndarray:
        if t not in self._counts:
            self._counts[t] = np.cumsum(self.visits(t).indicator(self.horizon), dtype=np.int64)
        return self._counts[t]

    def density(self, t: int) -> Fraction:
        """Lower-density estimate of S_t at the horizon."""
        if t not in self._density:
            self._density[t] = lower_density_estimate(self.visits(t), self.horizon)
        return self._density[t]


@dataclass
class TMSchedule:
    x: tuple
    m: list
    k: list
    m_hat: list
    alpha: list
    beta: list
    gamma: list
    eps: list
    d: list = field(default_factory=list)
    horizon: int = 0

    @property
    def stages(self) -> int:
        return len(self.m)

    def prev(self, seq: list, t: int) -> int:
        return seq[t - 1] if t > 0 else 0

    def payload_start(self, t: int) -> int:
        return self.prev(self.gamma, t) + (self.x[t] + 1) * self.m_hat[t]

    def shift(self, t: int) -> int:
        """payload position minus source index in y."""
        return self.prev(self.beta, t) + (self.x[t] + 1) * self.m_hat[t]

    @property
    def length(self) -> int:
        return self.gamma[-1]

    def stage_of(self, n: int) -> int:
        if n < 0 or n >= self.length:
            raise PreconditionError(f"schedule covers [0, {self.length}), asked about {n}")
        return bisect.bisect_right(self.gamma, n)

    def invariant_violations(self) -> list[str]:
        bad = []
        for t in range(self.stages):
            a = self.prev(self.alpha, t)
            if not self.m[t] > max(self.k[t], t * t * a):
                bad.append(f"stage {t}: m_t <= max(k_t, t^2 alpha_(t-1))")
            if not self.alpha[t] <= self.beta[t] <= self.gamma[t]:
                bad.append(f"stage {t}: alpha <= beta <= gamma fails")
            if not self.prev(self.gamma, t) <= self.m_hat[t]:
                bad.append(f"stage {t}: gamma_(t-1) > mh_t")
            if not self.m_hat[t] <= 2 * self.m[t]:
                bad.append(f"stage {t}: mh_t > 2 m_t")
        return bad

    def with_point(self, x) -> "TMSchedule":
        """The same stage sizes laid out for another point of Delta."""
        return _layout(_as_prefix(x, self.stages), self.m, self.k, self.eps, self.d, self.horizon)

    def to_dict(self) -> dict:
        return {
            "x": list(self.x), "m": self.m, "k": self.k, "m_hat": self.m_hat, "alpha": self.alpha,
            "beta": self.beta, "gamma": self.gamma, "eps": [str(e) for e in self.eps],
            "d_lower": [str(v) for v in self.d], "horizon": self.horizon,
        }


def _as_prefix(x, L: int) -> tuple:
    if isinstance(x, BaireRule):
        x = x.prefix(L)
    if isinstance(x, BairePoint):
        x = x.prefix
    x = tuple(int(v) for v in x)
    if len(x) < L:
        raise PreconditionError(f"point prefix of length {len(x)} is shorter than {L} stages")
    if not delta_check(BairePoint(x[:L])):
        raise PreconditionError("point is not in Delta (some x_n > n)")
    return x[:L]


def _layout(x, m, k, eps, d, horizon) -> TMSchedule:
    mh = [a + b for a, b in zip(m, k)]
    alpha, beta, gamma = [], [], []
    a = b = g = 0
    for t, v in enumerate(mh):
        a += v
        b += (x[t] + 1) * v
        g += (x[t] + 2) * v
        alpha.append(a)
        beta.append(b)
        gamma.append(g)
    return TMSchedule(tuple(x), list(m), list(k), mh, alpha, beta, gamma, list(eps), list(d), horizon)


def stage_sizes(stats: VisitStats, eps_rule: Callable[[int], Fraction] = default_eps,
                stages: int | None = None) -> tuple[list, list, list, list]:
    """(m, k, eps, d): the x-independent part of the schedule."""
    H = stats.horizon
    m_list, k_list, eps_list = [], [], []
    a_prev = 0
    gamma_cap = 0  # sum_{u<t} (u+2) mh_u bounds gamma_(t-1) for every x in Delta
    t = 0
    n = np.arange(H + 1, dtype=np.int64)
    while stages is None or t < stages:
        k_t = stats.k(t)
        eps = Fraction(eps_rule(t))
        lower = max(k_t, t * t * a_prev) + 1
        lower = max(lower, gamma_cap - k_t)
        need = lower
        for j in range(t + 1):
            d = stats.density(j)
            if d == 0:
                need = None
                break
            thr = (1 - eps) * d
            c = stats.counts(j)
            c = c - (c[a_prev - 1] if a_prev > 0 else 0)
            ok = c[a_prev:] * thr.denominator >= thr.numerator * (n[a_prev:] + 1)
            bad = np.flatnonzero(~ok)
            if bad.size:
                need = max(need, int(bad[-1]) + 1)
        if need is None or a_prev + 2 * need > H:
            if stages is not None or t == 0:
                raise HorizonError(f"horizon exhausted at stage {t}: density requirement not "
                                   f"certifiable within N={H}")
            break
        m_list.append(need)
        k_list.append(k_t)
        eps_list.append(eps)
        gamma_cap += (t + 2) * (need + k_t)
        a_prev += need + k_t
        t += 1
    d = [stats.density(j) for j in range(len(m_list))]
    return m_list, k_list, eps_list, d


def tm_build_schedule(x, stats: VisitStats, eps_rule: Callable[[int], Fraction] = default_eps,
                      stages: int | None = None) -> TMSchedule:
    m, k, eps, d = stage_sizes(stats, eps_rule, stages)
    return _layout(_as_prefix(x, len(m)), m, k, eps, d, stats.horizon)


def _weights_at_least_one(w: WeightSequence, M: int) -> bool:
    if isinstance(w, Constant):
        return w.lam >= 1
    if isinstance(w, Explicit):
        return all(v >= 1 for v in w.values) and w.tail >= 1
    if isinstance(w, FRatio):
        return True
    return all(w.weight(n) >= 1 for n in range(M + 1))


def tm_f(x, y: SeqVector, sched: TMSchedule, w: WeightSequence) -> SeqVector:
    """f(x) on [0, gamma_T); reading past the last built stage is a horizon error."""
    if not _weights_at_least_one(w, sched.length):
        raise ValueError("the construction needs w_n >= 1 for all n (norm bound would fail)")
    if x is not None and tuple(_as_prefix(x, sched.stages)) != sched.x:
        sched = sched.with_point(x)
    blocks = [
        RescaledBlock(sched.payload_start(t), sched.m_hat[t], y, w, shift=sched.shift(t))
        for t in range(sched.stages)
    ]
    return SeqVector(blocks, horizon=sched.length, space=y.space, exact=y.exact and w.exact,
                     name="f(x)")


def tm_iota(sched: TMSchedule, n: int) -> int:
    t = sched.stage_of(n)
    u = n - sched.payload_start(t)
    if 0 <= u < sched.m[t]:
        return sched.prev(sched.alpha, t) + u
    return 0


def tm_claim_equivalence_check(w: WeightSequence, y: SeqVector, sched: TMSchedule, i: int, n: int,
                               z: SeqVector | None = None) -> bool:
    """(T^n f(x))_j == (T^{iota(n)} y)_j for all j <= k_i."""
    t = sched.stage_of(n)
    iota = tm_iota(sched, n)
    if iota == 0:
        raise PreconditionError(f"iota({n}) = 0")
    if t < i:
        raise PreconditionError(f"n = {n} lies in stage {t} < i = {i}")
    if z is None:
        z = tm_f(None, y, sched, w)
    L = sched.k[i] + 1
    exact = w.exact and y.exact
    lhs = shift_apply(w, z, n, L, exact=exact)
    rhs = shift_apply(w, y, iota, L, exact=exact)
    if exact:
        return lhs == rhs
    return all(math.isclose(a, b, rel_tol=1e-9, abs_tol=0.0) for a, b in zip(lhs, rhs))


def admissible_pairs(sched: TMSchedule, count: int, rng: random.Random, i_max: int | None = None):
    """Random (i, n) with iota(n) != 0 and stage(n) >= i."""
    T = sched.stages
    i_max = T - 1 if i_max is None else min(i_max, T - 1)
    out = []
    while len(out) < count:
        t = rng.randrange(T)
        i = rng.randint(0, min(t, i_max))
        u = rng.randrange(sched.m[t])
        n = sched.payload_start(t) + u
        if tm_iota(sched, n) != 0:
            out.append((i, n))
    return out


def tm_visit_density_report(w: WeightSequence, z: SeqVector, sched: TMSchedule, stats: VisitStats,
                            i: int, j: int, N: int) -> dict:
    """Upper density of {n : T^n z in V_i} along the payload ends of stages t > i with
    x_t = j, against d_lower(S_i) / (1 + 2(j + 1))."""
    L = sched.k[i] + 1
    top = min(N, sched.length - L)
    visits = orbit_visits(w, z, stats.cylinder(i), top)
    counts = np.cumsum(visits.indicator(top), dtype=np.int64)
    witnesses = [sched.payload_start(t) + sched.m[t] - 1 for t in range(i + 1, sched.stages)
                 if sched.x[t] == j and sched.payload_start(t) + sched.m[t] - 1 <= top]
    measured = max((Fraction(int(counts[n]), n + 1) for n in witnesses), default=None)
    d = stats.density(i)
    bound = d / (1 + 2 * (j + 1))
    return {"i": i, "j": j, "horizon": top, "witnesses": witnesses,
            "upper_density": measured, "d_lower": d, "bound": bound}


def tm_zero_density_check(z: SeqVector, sched: TMSchedule, N: int | None = None) -> dict:
    """Lower density of {n : z_n = 0} and the per-stage bound on it."""
    N = sched.length - 1 if N is None else min(N, sched.length - 1)
    sign, _ = z.log_arrays(N + 1)
    zeros = NatSet.from_mask(sign == 0, name="zeros")
    counts = np.cumsum(sign == 0, dtype=np.int64)
    stages = []
    for t in range(sched.stages):
        xt, mh = sched.x[t], sched.m_hat[t]
        g_prev = sched.prev(sched.gamma, t)
        formula = Fraction((xt + 1) * mh, g_prev + (xt + 2) * mh)
        limit = Fraction(xt + 1, xt + 3)
        lo, hi = sched.payload_start(t), min(sched.gamma[t] - 1, N)
        measured = None
        if lo <= hi:
            idx = np.arange(lo, hi + 1)
            k = int(np.argmin(counts[idx] * 1.0 / (idx + 1)))
            measured = Fraction(int(counts[idx[k]]), int(idx[k]) + 1)
        stages.append({"t": t, "x_t": xt, "formula": formula, "limit": limit,
                       "formula_ge_limit": formula >= limit, "measured_min": measured,
                       "measured_ge_formula": measured is None or measured >= formula})
    return {"horizon": N, "lower_density": lower_density_estimate(zeros, N), "stages": stages}


def tm_norm_check(z: SeqVector, y: SeqVector, sched: TMSchedule, p: int) -> tuple:
    """(||f_T(x)||_p^p, ||y restricted to [0, alpha_T)||_p^p), exactly."""
    lhs = p_norm_pow(z.truncated(), p)
    rhs = p_norm_pow(restrict(y, [(0, sched.alpha[-1])]), p)
    return lhs, rhs


def tm_continuity_check(w: WeightSequence, y: SeqVector, sched: TMSchedule, x, x2, p: int) -> tuple:
    """(||f(x) - f(x')||_p^p, 2^p ||y restricted to [alpha_{n0}, alpha_T)||_p^p) with
    n0 the last index where x and x' agree."""
    s1, s2 = sched.with_point(x), sched.with_point(x2)
    n0 = agree_prefix(s1.x, s2.x)
    z1 = tm_f(None, y, s1, w).truncated()
    z2 = tm_f(None, y, s2, w).truncated()
    diff = combine([(1, z1), (-1, z2)])
    lhs = p_norm_pow(diff, p)
    start = s1.alpha[n0] if n0 >= 0 else 0
    tail = restrict(y, [(start, s1.alpha[-1])])
    rhs = mpq(2) ** p * p_norm_pow(tail, p)
    return lhs, rhs
