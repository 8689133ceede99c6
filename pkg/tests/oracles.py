"""Slow, independent reference implementations used only by the tests.

Everything here works in exact rational arithmetic on the binary values of the
float inputs, so it shares no code path with the numba kernels.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def dist(x: Fraction) -> Fraction:
    r = x - math.floor(x)
    return min(r, 1 - r)


def exact_form(row, q) -> Fraction:
    return sum((Fraction(float(a)) * int(b) for a, b in zip(row, q)), Fraction(0))


def _box(T, lo_zero=True):
    tops = [int(math.floor(t)) for t in T]
    ranges = [range(0 if lo_zero else -t, t + 1) for t in tops]
    for q in itertools.product(*ranges):
        if any(q):
            yield q


def sum_S(alpha, T):
    terms = []
    for q in _box(T):
        w = math.prod(max(1, v) for v in q)
        terms.append(1.0 / (w * float(dist(exact_form(alpha, q)))))
    return math.fsum(terms)


def sum_S_star(alpha, T):
    terms = []
    for q in range(1, int(math.floor(T)) + 1):
        terms.append(1.0 / (q * math.prod(float(dist(Fraction(float(a)) * q)) for a in alpha)))
    return math.fsum(terms)


def sum_Sigma(L, T):
    L = np.atleast_2d(L)
    terms = []
    for q in _box(T):
        terms.append(1.0 / math.prod(float(dist(exact_form(row, q))) for row in L))
    return math.fsum(terms)


def count_M(L, eps, R, T):
    """#{(p, q): q != 0 in the symmetric box, |L_i q + p_i| <= R, prod |.| < eps}, exactly."""
    L = np.atleast_2d(L)
    eps, R = Fraction(float(eps)), Fraction(float(R))
    total = 0
    for q in _box(T, lo_zero=False):
        per_row = []
        for row in L:
            x = exact_form(row, q)
            lo, hi = math.ceil(-R - x), math.floor(R - x)
            per_row.append([abs(x + p) for p in range(lo, hi + 1)])
        for combo in itertools.product(*per_row):
            if math.prod(combo) < eps:
                total += 1
    return total


def naive_minima(B, box):
    """Greedy successive minima from every coefficient vector in [-box, box]^d."""
    B = np.asarray(B, dtype=float)
    d = B.shape[1]
    grids = np.meshgrid(*[np.arange(-box, box + 1)] * d, indexing="ij")
    Z = np.stack([g.ravel() for g in grids], axis=1)
    Z = Z[np.any(Z != 0, axis=1)]
    V = Z @ B.T
    lengths = np.linalg.norm(V, axis=1)
    order = np.argsort(lengths, kind="stable")
    chosen, mins = [], []
    for k in order:
        trial = chosen + [Z[k]]
        if np.linalg.matrix_rank(np.array(trial, dtype=float)) == len(trial):
            chosen.append(Z[k])
            mins.append(lengths[k])
            if len(chosen) == d:
                break
    return mins


def coefficient_box(B):
    """Coefficient bound that contains every vector no longer than the longest basis column."""
    B = np.asarray(B, dtype=float)
    r = np.linalg.norm(B, axis=0).max()
    return int(math.ceil(np.linalg.norm(np.linalg.inv(B), 2) * r + 1e-9))
