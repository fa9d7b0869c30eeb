"""Shared compiled numeric primitives.

Both the ask/tell objects and the fused run kernels compute squared distances
through these helpers, so the two paths perform identical floating-point
operations and produce bit-identical results.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def sq_dist(a, b):
    s = 0.0
    for j in range(a.size):
        d = a[j] - b[j]
        s += d * d
    return s


@njit(cache=True, nogil=True)
def sq_norm(a):
    s = 0.0
    for j in range(a.size):
        s += a[j] * a[j]
    return s


@njit(cache=True, nogil=True)
def sq_dist_rows(points, center):
    n = points.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        s = 0.0
        for j in range(points.shape[1]):
            d = points[i, j] - center[j]
            s += d * d
        out[i] = s
    return out
