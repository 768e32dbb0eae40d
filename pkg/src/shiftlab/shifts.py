"""Weighted backward shift dynamics: orbits, cylinder visits, the Bayart-Ruzsa sum.

``T = B_w`` acts by ``(T x)_j = w_{j+1} x_{j+1}``, hence

    (T^n x)_j = w_{1+j} ... w_{n+j} * x_{n+j}.

Exact mode multiplies ``mpq`` values; float mode adds logarithms so that the
product and the entry can sit far outside the binary64 range individually.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from . import _kernels
from .ideals import IdealSpec, NatSet, Verdict, in_ideal_at_horizon
from .sequences import Cylinder, SeqVector
from .weights import Constant, Explicit, FRatio, RuleWeights, WeightSequence, weight_product

__all__ = [
    "weight_product",
    "shift_apply",
    "orbit_arrays",
    "orbit_coordinates",
    "orbit_deviation",
    "orbit_visits",
    "Classification",
    "BayartRuzsaReport",
    "bayart_ruzsa_report",
    "ClusterEvidence",
    "cluster_point_check",
    "write_orbit_csv",
]

# relative width of the boundary band that float sweeps count as outside
BOUNDARY_SLACK = 1e-9


def shift_apply(w: WeightSequence, x: SeqVector, n: int, L: int, exact: bool | None = None) -> list:
    """[(T^n x)_j for j < L]."""
    if n < 0 or L < 0:
        raise ValueError("n and L must be natural numbers")
    if exact is None:
        exact = w.exact and x.exact
    x._check(n + L)
    if exact:
        out = []
        for j in range(L):
            v = x.value(n + j)
            out.append(v * w.product(1 + j, n + j) if v != 0 else mpq(0))
        return out
    sign, logs = x.log_range(n, n + L)
    C = w.log_cumsum(n + L)
    Ng = w.neg_cumsum(n + L)
    j = np.arange(L)
    flip = (Ng[n + j + 1] - Ng[j + 1]) & 1
    with np.errstate(under="ignore", over="ignore"):
        mag = np.exp(C[n + j + 1] - C[j + 1] + logs)
    vals = np.where(sign == 0, 0.0, sign * np.where(flip == 1, -1, 1) * mag)
    return [float(v) for v in vals]


def orbit_arrays(w: WeightSequence, x: SeqVector, N: int, k: int):
    """Contiguous kernel inputs for orbit queries with ``n <= N`` and ``j <= k``."""
    M = N + k + 1
    x._check(M)
    sign, logs = x.log_arrays(M)
    C = np.ascontiguousarray(w.log_cumsum(M)[: M + 1], dtype=np.float64)
    Ng = np.ascontiguousarray(w.neg_cumsum(M)[: M + 1], dtype=np.int64)
    return C, Ng, np.ascontiguousarray(sign), np.ascontiguousarray(logs)


def orbit_coordinates(w: WeightSequence, x: SeqVector, N: int, k: int) -> np.ndarray:
    """Float array ``out[n, j] = (T^n x)_j`` for ``n <= N``, ``j <= k``."""
    C, Ng, sign, logs = orbit_arrays(w, x, N, k)
    out = np.empty((N + 1, k + 1))
    n = np.arange(N + 1)
    for j in range(k + 1):
        m = n + j
        flip = (Ng[m + 1] - Ng[j + 1]) & 1
        with np.errstate(under="ignore", over="ignore"):
            mag = np.exp(C[m + 1] - C[j + 1] + logs[m])
        out[:, j] = np.where(sign[m] == 0, 0.0, sign[m] * np.where(flip == 1, -1, 1) * mag)
    return out


def orbit_deviation(w: WeightSequence, x: SeqVector, centers: Sequence, N: int) -> np.ndarray:
    """max_{j <= k} |(T^n x)_j - centers[j]| for each n <= N (binary64)."""
    k = len(centers) - 1
    C, Ng, sign, logs = orbit_arrays(w, x, N, k)
    c = np.array([float(v) for v in centers], dtype=np.float64)
    return _kernels.orbit_deviation(C, Ng, sign, logs, c, N)


def orbit_visits(w: WeightSequence, x: SeqVector, U: Cylinder, N: int, mode: str = "float") -> NatSet:
    """{n <= N : T^n x in U}.

    ``mode="float"`` sweeps in binary64 and treats the band within relative
    ``BOUNDARY_SLACK`` of the boundary as outside, so boundary hits are never
    counted.  ``"boundary"`` re-decides that band in rational arithmetic and
    ``"exact"`` decides every n rationally; both need exact ``w`` and ``x``.
    """
    if mode not in ("float", "boundary", "exact"):
        raise ValueError(f"unknown visit mode {mode!r}")
    k = U.k
    if mode != "float" and not (w.exact and x.exact):
        raise ValueError(f"{mode} visits need exact weights and an exact vector")
    if mode == "exact":
        hits = [n for n in range(N + 1) if U.contains(shift_apply(w, x, n, k + 1, exact=True))]
        return NatSet.explicit(hits, horizon=N, name="visits")
    C, Ng, sign, logs = orbit_arrays(w, x, N, k)
    c = U.float_centers()
    r = float(U.radius)
    band = BOUNDARY_SLACK * max(1.0, r)
    mask = _kernels.orbit_visit_mask(C, Ng, sign, logs, c, r - band, N).astype(bool)
    if mode == "boundary":
        dev = _kernels.orbit_deviation(C, Ng, sign, logs, c, N)
        for n in np.flatnonzero(np.abs(dev - r) <= band):
            mask[n] = U.contains(shift_apply(w, x, int(n), k + 1, exact=True))
    return NatSet.explicit(np.flatnonzero(mask), horizon=N, name="visits")


# ---------------------------------------------------------------------------
# Bayart-Ruzsa


class Classification(str, enum.Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class BayartRuzsaReport:
    partial_sum: float
    classification: Classification
    p: float
    horizon: int

    def to_dict(self) -> dict:
        return {"partial_sum": self.partial_sum, "classification": self.classification.value,
                "p": self.p, "horizon": self.horizon}


def _classify(w: WeightSequence) -> Classification:
    if isinstance(w, FRatio):
        # 1/(w_0...w_n)^p = f(0)^p / ((n+3) log(n+3)): a divergent series
        return Classification.DIVERGENT
    if isinstance(w, (Constant, Explicit, RuleWeights)):
        lam = w.tail_constant()
        if lam is not None:
            return Classification.CONVERGENT if abs(lam) > 1 else Classification.DIVERGENT
    return Classification.UNKNOWN


def bayart_ruzsa_report(w: WeightSequence, p: float, N: int) -> BayartRuzsaReport:
    """sum_{n <= N} 1/|w_0 ... w_n|^p and the analytic verdict for the family."""
    if not (1 <= p < math.inf):
        raise ValueError("p must lie in [1, inf)")
    C = w.log_cumsum(N + 1)
    with np.errstate(over="ignore", under="ignore"):
        terms = np.exp(-p * C[1:N + 2])
    total = math.inf if not np.all(np.isfinite(terms)) else math.fsum(terms)
    return BayartRuzsaReport(total, _classify(w), p, N)


# ---------------------------------------------------------------------------
# cluster points


class ClusterEvidence(str, enum.Enum):
    IS_CLUSTER = "IsClusterEvidence"
    NOT_CLUSTER = "NotClusterEvidence"
    UNDECIDED = "Undecided"


def cluster_point_check(w: WeightSequence, x: SeqVector, target: SeqVector | Sequence, k: int, eps,
                        ideal: IdealSpec, N: int, delta) -> ClusterEvidence:
    """Is ``target`` an I-cluster point of the orbit of x, judged on ``[0, N]``?"""
    U = Cylinder.around(target, k, eps)
    visits = orbit_visits(w, x, U, N)
    verdict = in_ideal_at_horizon(ideal, visits, N, delta)
    return {
        Verdict.POSITIVE: ClusterEvidence.IS_CLUSTER,
        Verdict.IN_IDEAL: ClusterEvidence.NOT_CLUSTER,
        Verdict.UNDECIDED: ClusterEvidence.UNDECIDED,
    }[verdict]


def write_orbit_csv(path, w: WeightSequence, x: SeqVector, U: Cylinder, N: int) -> int:
    """Write columns n, x0..xk, in_U for n <= N; returns the number of visits."""
    coords = orbit_coordinates(w, x, N, U.k)
    visits = orbit_visits(w, x, U, N)
    inside = visits.indicator(N)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["n"] + [f"x{j}" for j in range(U.k + 1)] + ["in_U"])
        for n in range(N + 1):
            out.writerow([n] + [repr(float(v)) for v in coords[n]] + [int(inside[n])])
    return int(inside.sum())
