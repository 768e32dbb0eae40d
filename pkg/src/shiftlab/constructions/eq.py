"""Restriction of a pointwise I-hypercyclic vector to a norm I-hypercyclic one.

Stage t picks a finite F_t inside S_t = {n : T^n y in U(h(t))} with

  (a) min F_t > max F_{t-1} + m_{t-1},
  (b) ||y restricted to [min F_t, inf)||_p <= 2^-t / ||T||^{max F_{t-1}},
  (c) phi(F_t) >= t,

and keeps g_t = min F_t.  The vector is y restricted to the union of
[g_t, g_t + m_{i(t)}].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..ideals import Cardinality, HorizonError, Lscsm
from ..sequences import SeqVector, restrict
from ..shifts import orbit_deviation
from ..weights import WeightSequence
from .targets import TargetEnumeration
from .tm import cantor_pair, cantor_unpair

__all__ = ["EqBlocks", "eq_build_blocks", "eq_vector", "eq_error", "eq_error_bound", "eq_report", "stages_for"]

# float sweeps treat this relative band at a cylinder boundary as outside
_BAND = 1e-9


@dataclass
class EqBlocks:
    F: list                    # F_t as sorted int arrays
    g: list                    # g_t = min F_t
    m: list                    # m_{i(t)}: last possibly-nonzero coordinate of the stage target
    pairs: dict = field(default_factory=dict)   # (i, j) -> t
    horizon: int = 0
    op_norm: float = 0.0

    @property
    def stages(self) -> int:
        return len(self.F)

    def G(self, i: int) -> list[int]:
        return [self.g[t] for (a, _), t in sorted(self.pairs.items()) if a == i]

    def intervals(self) -> list[tuple[int, int]]:
        return [(g, g + m + 1) for g, m in zip(self.g, self.m)]


def _log_tail(y: SeqVector, p: float, H: int) -> np.ndarray:
    """log ||y restricted to [n, inf)||_p^p for n in [0, H]."""
    sign, logs = y.log_arrays(H)
    terms = np.where(sign == 0, -np.inf, p * logs)
    if y.is_finite:
        beyond = -np.inf
    else:
        tail = y.tail_bound(H, p) if y.tail_bound is not None else math.inf
        beyond = math.log(tail) if tail > 0 else -np.inf
    suffix = np.logaddexp.accumulate(terms[::-1])[::-1]
    return np.logaddexp(np.append(suffix, -np.inf), beyond)


def eq_build_blocks(y: SeqVector, targets: TargetEnumeration, w: WeightSequence, stages: int,
                    horizon: int, p: float = 2, phi: Lscsm | None = None) -> EqBlocks:
    """Greedy F_0, ..., F_{stages-1} satisfying (a)-(c) inside [0, horizon]."""
    phi = phi or Cardinality()
    norm = float(w.bound) if w.bound is not None else math.nan
    if not norm > 1:
        raise ValueError("the construction needs a declared operator bound ||T|| = sup|w_n| > 1")
    H = horizon
    log_tail = _log_tail(y, p, H + 1)
    dev_cache: dict[int, np.ndarray] = {}

    def deviation(i: int) -> np.ndarray:
        if i not in dev_cache:
            m = targets.m_last(i)
            dev_cache[i] = orbit_deviation(w, y, targets.padded(i, m + 1), H)
        return dev_cache[i]

    F, g, ms, pairs = [], [], [], {}
    prev_max, prev_m = 0, 0
    for t in range(stages):
        i, j = cantor_unpair(t)
        radius = 2.0 ** -j
        S = np.flatnonzero(deviation(i) < radius * (1 - _BAND))
        lo_a = prev_max + prev_m + 1
        # (b) in logs: (1/p) log tail(n) <= -t log 2 - max F_{t-1} log ||T||
        thr = p * (-t * math.log(2) - prev_max * math.log(norm))
        ok = np.flatnonzero(log_tail <= thr)
        if ok.size == 0:
            raise HorizonError(f"horizon exhausted at stage {t}: tail condition (b) not met by N={H}")
        lo = max(lo_a, int(ok[0]))
        cand = S[S >= lo]
        chosen: list[int] = []
        for n in cand:
            chosen.append(int(n))
            if phi(chosen) >= t:
                break
        if not chosen or phi(chosen) < t:
            raise HorizonError(f"horizon exhausted at stage {t}: S_{t} has too few points "
                               f"in [{lo}, {H}] for condition (c)")
        Ft = np.array(chosen, dtype=np.int64)
        F.append(Ft)
        g.append(int(Ft[0]))
        ms.append(targets.m_last(i))
        pairs[(i, j)] = t
        prev_max, prev_m = int(Ft[-1]), targets.m_last(i)
    return EqBlocks(F, g, ms, pairs, H, norm)


def eq_vector(y: SeqVector, blocks: EqBlocks) -> SeqVector:
    """z = y restricted to the union of [g_t, g_t + m_{i(t)}]."""
    return restrict(y, blocks.intervals())


def eq_error(w: WeightSequence, z: SeqVector, target: tuple, n: int, p: float = 2) -> float:
    """||T^n z - s||_p for finitely supported z, evaluated in log space past the target."""
    end = z.support_end
    L = max(len(target), 1)
    if end <= n:
        coords_sign = np.zeros(0, dtype=np.int8)
        coords_log = np.zeros(0)
    else:
        sign, logs = z.log_range(n, end)
        C = w.log_cumsum(end)
        Ng = w.neg_cumsum(end)
        jj = np.arange(end - n)
        coords_log = C[n + jj + 1] - C[jj + 1] + logs
        flip = (Ng[n + jj + 1] - Ng[jj + 1]) & 1
        coords_sign = np.where(flip == 1, -sign, sign)
    head = [0.0] * L
    for jdx in range(min(L, coords_sign.size)):
        if coords_sign[jdx] != 0:
            head[jdx] = float(coords_sign[jdx]) * math.exp(coords_log[jdx])
    s = [float(v) for v in target] + [0.0] * (L - len(target))
    head_sum = math.fsum(abs(a - b) ** p for a, b in zip(head, s))
    rest = coords_log[L:][coords_sign[L:] != 0]
    if rest.size:
        m = float(rest.max())
        tail_sum = math.exp(p * m) * math.fsum(np.exp(p * (rest - m)))
    else:
        tail_sum = 0.0
    return (head_sum + tail_sum) ** (1.0 / p)


def eq_error_bound(i: int, j: int, t: int) -> float:
    return 2.0 ** -j * (i + 2) + 2.0 ** -t


def eq_report(w: WeightSequence, z: SeqVector, blocks: EqBlocks, targets: TargetEnumeration,
              p: float = 2, i_max: int | None = None, j_max: int | None = None) -> list[dict]:
    rows = []
    for (i, j), t in sorted(blocks.pairs.items()):
        if (i_max is not None and i > i_max) or (j_max is not None and j > j_max):
            continue
        err = eq_error(w, z, targets(i), blocks.g[t], p)
        bound = eq_error_bound(i, j, t)
        rows.append({"i": i, "j": j, "t": t, "g": blocks.g[t], "error": err, "bound": bound,
                     "ok": err <= bound + 1e-9})
    return rows


def stages_for(i_max: int, j_max: int) -> int:
    """Number of stages needed so that every pair (i, j) with i <= i_max, j <= j_max is built."""
    return max(cantor_pair(i, j) for i in range(i_max + 1) for j in range(j_max + 1)) + 1
