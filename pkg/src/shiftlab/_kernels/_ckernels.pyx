# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures and results match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, INFINITY

cnp.import_array()


def window_extrema(const cnp.int64_t[::1] counts, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t n, best_hi = lo, best_lo = lo
    cdef cnp.int64_t c_hi = counts[lo], c_lo = counts[lo]
    cdef cnp.int64_t d_hi = lo + 1, d_lo = lo + 1
    cdef cnp.int64_t c, d
    for n in range(lo + 1, hi + 1):
        c = counts[n]
        d = n + 1
        # c/d > c_hi/d_hi, cross-multiplied; strict so ties keep the first index
        if c * d_hi > c_hi * d:
            c_hi = c
            d_hi = d
            best_hi = n
        if c * d_lo < c_lo * d:
            c_lo = c
            d_lo = d
            best_lo = n
    return best_hi, best_lo


def orbit_deviation(const double[::1] logw_cum, const cnp.int64_t[::1] wneg_cum,
                    const cnp.int8_t[::1] xsign, const double[::1] xlog,
                    const double[::1] centers, Py_ssize_t N):
    cdef Py_ssize_t k = centers.shape[0] - 1
    cdef Py_ssize_t n, l, m
    cdef double v, dev, cur
    cdef int s
    out = np.empty(N + 1, dtype=np.float64)
    cdef double[::1] res = out
    for n in range(N + 1):
        dev = 0.0
        for l in range(k + 1):
            m = n + l
            s = xsign[m]
            if s == 0:
                v = 0.0
            else:
                v = exp(logw_cum[m + 1] - logw_cum[l + 1] + xlog[m])
                if (wneg_cum[m + 1] - wneg_cum[l + 1]) & 1:
                    s = -s
                if s < 0:
                    v = -v
            cur = fabs(v - centers[l])
            if cur != cur:
                cur = INFINITY
            if cur > dev:
                dev = cur
        res[n] = dev
    return out


def orbit_visit_mask(const double[::1] logw_cum, const cnp.int64_t[::1] wneg_cum,
                     const cnp.int8_t[::1] xsign, const double[::1] xlog,
                     const double[::1] centers, double radius, Py_ssize_t N):
    cdef Py_ssize_t k = centers.shape[0] - 1
    cdef Py_ssize_t n, l, m
    cdef double v
    cdef int s
    cdef bint inside
    out = np.zeros(N + 1, dtype=np.uint8)
    cdef cnp.uint8_t[::1] res = out
    for n in range(N + 1):
        inside = True
        for l in range(k + 1):
            m = n + l
            s = xsign[m]
            if s == 0:
                v = 0.0
            else:
                v = exp(logw_cum[m + 1] - logw_cum[l + 1] + xlog[m])
                if (wneg_cum[m + 1] - wneg_cum[l + 1]) & 1:
                    s = -s
                if s < 0:
                    v = -v
            # open cylinder: boundary and NaN are non-visits
            if not (fabs(v - centers[l]) < radius):
                inside = False
                break
        if inside:
            res[n] = 1
    return out
