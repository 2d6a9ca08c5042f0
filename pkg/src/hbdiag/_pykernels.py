"""Pure-Python/NumPy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable.
Semantics are kept bit-for-bit compatible with the extension; the test
suite runs both backends against each other.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "python"

_INF = float("inf")


def dtw(q, c, squared=False, band=-1):
    """Cumulative warping cost between 1-d sequences q and c.

    The recurrence accumulates the local cost of every visited cell:
    boundary cells extend along their edge, interior cells add the local
    cost to the cheapest of the three predecessors.  ``band < 0`` means
    unconstrained; otherwise cells with |i - j| > band are unreachable.
    Returns inf when the band disconnects the two ends.
    """
    q = [float(v) for v in np.asarray(q, dtype=np.float64)]
    c = [float(v) for v in np.asarray(c, dtype=np.float64)]
    n, m = len(q), len(c)
    prev = [_INF] * m
    for i in range(n):
        curr = [_INF] * m
        if band < 0:
            jlo, jhi = 0, m - 1
        else:
            jlo, jhi = max(0, i - band), min(m - 1, i + band)
            if jlo > jhi:
                prev = curr
                continue
        qi = q[i]
        for j in range(jlo, jhi + 1):
            d = qi - c[j]
            d = d * d if squared else abs(d)
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
        prev = curr
    return prev[m - 1]


def envelope(values, w):
    """Windowed running max/min: bounds over indices [i-w, i+w], clipped."""
    v = np.asarray(values, dtype=np.float64)
    pad_hi = np.full(w, -_INF)
    pad_lo = np.full(w, _INF)
    upper = sliding_window_view(np.concatenate([pad_hi, v, pad_hi]), 2 * w + 1).max(axis=1)
    lower = sliding_window_view(np.concatenate([pad_lo, v, pad_lo]), 2 * w + 1).min(axis=1)
    return upper, lower


def lb_keogh_value(c, upper, lower):
    """Accumulated squared excursion of c outside the [lower, upper] tube."""
    c = np.asarray(c, dtype=np.float64)
    over = np.maximum(c - upper, 0.0)
    under = np.maximum(lower - c, 0.0)
    return float(np.dot(over, over) + np.dot(under, under))
