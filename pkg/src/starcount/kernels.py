"""Compiled inner loops over integer boxes.

Each kernel handles one block of the leading coordinate so that callers can
split the work into a fixed list of blocks and merge results in block order.
All kernels release the GIL.

Distances to the nearest integer of q . a use an error-free product
(Veltkamp/Dekker) so the fractional part of q_j * a_j is exact up to the final
rounding, even for q near 1e6.
"""

import math

import numpy as np
from numba import njit

_SPLIT = 134217729.0  # 2**27 + 1


@njit(cache=True, nogil=True, inline="always")
def _two_prod(a, b):
    p = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


@njit(cache=True, nogil=True, inline="always")
def _fold(x):
    return x - math.floor(x + 0.5)


@njit(cache=True, nogil=True)
def form_fraction(row, q):
    """Signed fractional part of sum_j row[j] * q[j], in [-1/2, 1/2)."""
    s = 0.0
    for j in range(q.shape[0]):
        if q[j] == 0:
            continue
        p, e = _two_prod(float(q[j]), row[j])
        s += _fold(p - math.floor(p + 0.5) + e)
    return _fold(s)


@njit(cache=True, nogil=True, inline="always")
def _weight(q, mode):
    # 0: none, 1: prod max(1, |q_j|), 2: prod |q_j|
    w = 1.0
    if mode == 1:
        for j in range(q.shape[0]):
            a = abs(q[j])
            if a > 1:
                w *= a
    elif mode == 2:
        for j in range(q.shape[0]):
            w *= abs(q[j])
    return w


@njit(cache=True, nogil=True, inline="always")
def _advance(q, lo, hi):
    """Odometer step over coordinates 1..n-1.  Returns False after the last."""
    j = q.shape[0] - 1
    while j >= 1:
        if q[j] < hi[j]:
            q[j] += 1
            return True
        q[j] = lo[j]
        j -= 1
    return False


@njit(cache=True, nogil=True, inline="always")
def _is_zero(q):
    for j in range(q.shape[0]):
        if q[j] != 0:
            return False
    return True


@njit(cache=True, nogil=True, inline="always")
def _first_nonzero_negative(q):
    for j in range(q.shape[0]):
        if q[j] != 0:
            return q[j] < 0
    return False


@njit(cache=True, nogil=True, inline="always")
def _neumaier(s, c, x):
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@njit(cache=True, nogil=True)
def recip_sum_block(L, lo, hi, a, b, wmode, thr_lo, thr_hi, tiny, sums, comps, bad_q):
    """Compensated sums of 1/D over q != 0, D = weight(q) * prod_i ||L_i q||.

    Terms are binned by D <= thr_lo, D <= thr_hi, rest.  Returns 1 and writes
    the offending q into bad_q if some distance is below ``tiny``.
    """
    m = L.shape[0]
    n = lo.shape[0]
    q = lo.copy()
    for q0 in range(a, b + 1):
        q[0] = q0
        for j in range(1, n):
            q[j] = lo[j]
        while True:
            if not _is_zero(q):
                d = _weight(q, wmode)
                for i in range(m):
                    dist = abs(form_fraction(L[i], q))
                    if dist < tiny:
                        for j in range(n):
                            bad_q[j] = q[j]
                        return 1
                    d *= dist
                k = 0 if d <= thr_lo else (1 if d <= thr_hi else 2)
                sums[k], comps[k] = _neumaier(sums[k], comps[k], 1.0 / d)
            if not _advance(q, lo, hi):
                break
    return 0


@njit(cache=True, nogil=True)
def window_count_block(L, lo, hi, a, b, wmode, lower, upper, margin):
    """Count q != 0 with lower < weight(q) * prod_i ||L_i q|| <= upper."""
    m = L.shape[0]
    n = lo.shape[0]
    q = lo.copy()
    count = 0
    flag = 0
    for q0 in range(a, b + 1):
        q[0] = q0
        for j in range(1, n):
            q[j] = lo[j]
        while True:
            if not _is_zero(q):
                d = _weight(q, wmode)
                for i in range(m):
                    d *= abs(form_fraction(L[i], q))
                if abs(d - lower) <= margin or abs(d - upper) <= margin:
                    flag = 1
                if lower < d and d <= upper:
                    count += 1
            if not _advance(q, lo, hi):
                break
    return count, flag


@njit(cache=True, nogil=True)
def min_scan_block(L, lo, hi, a, b, power, symmetric, best_q):
    """Minimum over q != 0 of W * prod_i ||L_i q|| * log(max(W, e))**power.

    W = prod max(1, |q_j|).  With ``symmetric`` only one of q, -q is visited.
    """
    m = L.shape[0]
    n = lo.shape[0]
    q = lo.copy()
    best = np.inf
    for q0 in range(a, b + 1):
        q[0] = q0
        for j in range(1, n):
            q[j] = lo[j]
        while True:
            if not _is_zero(q) and not (symmetric and _first_nonzero_negative(q)):
                w = _weight(q, 1)
                d = w
                for i in range(m):
                    d *= abs(form_fraction(L[i], q))
                if power != 0.0:
                    d *= math.log(max(w, math.e)) ** power
                if d < best:
                    best = d
                    for j in range(n):
                        best_q[j] = q[j]
            if not _advance(q, lo, hi):
                break
    return best


@njit(cache=True, nogil=True)
def count_m_block(L, eps, R, tmax, a, b, margin):
    """Count (p, q), q != 0, |q_j| <= tmax_j, |L_i q + p_i| <= R, prod < eps."""
    m = L.shape[0]
    n = tmax.shape[0]
    lo = -tmax
    q = lo.copy()
    width = int(math.floor(2.0 * R)) + 3
    vals = np.empty((m, width))
    cnt = np.empty(m, np.int64)
    idx = np.empty(m, np.int64)
    count = 0
    flag = 0
    for q0 in range(a, b + 1):
        q[0] = q0
        for j in range(1, n):
            q[j] = lo[j]
        while True:
            if not _is_zero(q):
                empty = False
                for i in range(m):
                    base = 0.0
                    for j in range(n):
                        base = base + L[i, j] * q[j]
                    c = 0
                    p = math.ceil(-R - base) - 1
                    while p <= math.floor(R - base) + 1:
                        x = base + p
                        if abs(x) <= R:
                            vals[i, c] = abs(x)
                            c += 1
                        p += 1
                    cnt[i] = c
                    if c == 0:
                        empty = True
                if not empty:
                    for i in range(m):
                        idx[i] = 0
                    while True:
                        prod = 1.0
                        for i in range(m):
                            prod = prod * vals[i, idx[i]]
                        if abs(prod - eps) <= margin:
                            flag = 1
                        if prod < eps:
                            count += 1
                        i = m - 1
                        while i >= 0:
                            idx[i] += 1
                            if idx[i] < cnt[i]:
                                break
                            idx[i] = 0
                            i -= 1
                        if i < 0:
                            break
            if not _advance(q, lo, tmax):
                break
    return count, flag
