# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: warping-cost recurrence and envelope scans.

Mirrors _pykernels exactly; only the inner loops differ.
"""

import numpy as np

BACKEND = "compiled"

cdef double INF = float("inf")


def dtw(q, c, bint squared=False, long band=-1):
    """Cumulative warping cost between 1-d sequences q and c.

    Same contract as the Python backend: boundary cells extend along
    their edge, interior cells add the local cost to the cheapest of the
    three predecessors; a non-negative band excludes cells |i - j| > band.
    """
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t n = qv.shape[0]
    cdef Py_ssize_t m = cv.shape[0]
    cdef double[::1] prev = np.full(m, INF)
    cdef double[::1] curr = np.empty(m)
    cdef double[::1] tmp
    cdef Py_ssize_t i, j, jlo, jhi
    cdef double d, best, qi

    for i in range(n):
        if band < 0:
            jlo = 0
            jhi = m - 1
        else:
            jlo = i - band if i - band > 0 else 0
            jhi = i + band if i + band < m - 1 else m - 1
        for j in range(m):
            curr[j] = INF
        qi = qv[i]
        for j in range(jlo, jhi + 1):
            d = qi - cv[j]
            d = d * d if squared else (d if d >= 0 else -d)
            if i == 0:
                best = 0.0 if j == 0 else curr[j - 1]
            elif j == 0:
                best = prev[0]
            else:
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if curr[j - 1] < best:
                    best = curr[j - 1]
            curr[j] = d + best
        tmp = prev
        prev = curr
        curr = tmp
    return prev[m - 1]


def envelope(values, long w):
    """Windowed running max/min: bounds over indices [i-w, i+w], clipped."""
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    upper_arr = np.empty(n)
    lower_arr = np.empty(n)
    cdef double[::1] upper = upper_arr
    cdef double[::1] lower = lower_arr
    cdef Py_ssize_t i, j, lo, hi
    cdef double mx, mn

    for i in range(n):
        lo = i - w if i - w > 0 else 0
        hi = i + w if i + w < n - 1 else n - 1
        mx = v[lo]
        mn = v[lo]
        for j in range(lo + 1, hi + 1):
            if v[j] > mx:
                mx = v[j]
            if v[j] < mn:
                mn = v[j]
        upper[i] = mx
        lower[i] = mn
    return upper_arr, lower_arr


def lb_keogh_value(c, upper, lower):
    """Accumulated squared excursion of c outside the [lower, upper] tube."""
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] uv = np.ascontiguousarray(upper, dtype=np.float64)
    cdef double[::1] lv = np.ascontiguousarray(lower, dtype=np.float64)
    cdef Py_ssize_t i, n = cv.shape[0]
    cdef double acc = 0.0, d

    for i in range(n):
        if cv[i] > uv[i]:
            d = cv[i] - uv[i]
            acc += d * d
        elif cv[i] < lv[i]:
            d = cv[i] - lv[i]
            acc += d * d
    return acc
