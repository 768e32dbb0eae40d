"""Pure numpy versions of the compiled kernels (same signatures, same results)."""

import numpy as np


def window_extrema(counts, lo, hi):
    """Return ``(argmax, argmin)`` of ``counts[n]/(n+1)`` over ``n in [lo, hi]``.

    Ties resolve to the smallest index, decided exactly on integers.
    """
    n = np.arange(lo, hi + 1, dtype=np.int64)
    c = np.asarray(counts[lo:hi + 1], dtype=np.int64)
    ratio = c / (n + 1.0)
    result = []
    for pick in (np.max, np.min):
        target = pick(ratio)
        cand = np.flatnonzero(np.abs(ratio - target) <= 1e-12 * max(1.0, abs(target)))
        best = int(cand[0])
        for idx in cand[1:]:
            idx = int(idx)
            lhs = int(c[idx]) * (int(n[best]) + 1)
            rhs = int(c[best]) * (int(n[idx]) + 1)
            if (pick is np.max and lhs > rhs) or (pick is np.min and lhs < rhs):
                best = idx
        result.append(lo + best)
    return result[0], result[1]


def _coordinate(logw_cum, wneg_cum, xsign, xlog, l, N):
    m = np.arange(l, N + l + 1)
    s = xsign[m].astype(np.int64)
    flips = (wneg_cum[m + 1] - wneg_cum[l + 1]) & 1
    s = np.where(flips == 1, -s, s)
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.exp(logw_cum[m + 1] - logw_cum[l + 1] + xlog[m])
    return np.where(s == 0, 0.0, s * mag)


def orbit_deviation(logw_cum, wneg_cum, xsign, xlog, centers, N):
    dev = np.zeros(N + 1)
    for l, c in enumerate(centers):
        with np.errstate(invalid="ignore"):
            cur = np.abs(_coordinate(logw_cum, wneg_cum, xsign, xlog, l, N) - c)
        cur[np.isnan(cur)] = np.inf
        np.maximum(dev, cur, out=dev)
    return dev


def orbit_visit_mask(logw_cum, wneg_cum, xsign, xlog, centers, radius, N):
    inside = np.ones(N + 1, dtype=bool)
    for l, c in enumerate(centers):
        with np.errstate(invalid="ignore"):
            inside &= np.abs(_coordinate(logw_cum, wneg_cum, xsign, xlog, l, N) - c) < radius
    return inside.astype(np.uint8)
