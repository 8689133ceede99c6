"""Lattice-point counts and reciprocal sums over integer boxes.

Heavy loops run in :mod:`starcount.kernels`.  The leading coordinate is cut
into a fixed list of blocks; blocks may run on several threads but partial
results are merged in block order (floating sums through ``math.fsum``), so
every result is bit-identical whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import CapabilityError, DomainError, SingularTermError
from .lattice import as_matrix
from .scalar import COMPARE_MARGIN, SINGULAR_DISTANCE, clamped_log
from .tessellation import StarBodyH1, partition_h1

BOX_BUDGET = 1e9
N_BLOCKS = 64


@dataclass
class CountQuery:
    L: np.ndarray
    epsilon: float
    R: float
    T: tuple

    def __post_init__(self):
        self.L = as_matrix(self.L)
        self.T = _sides(self.T, self.L.shape[1])
        if self.epsilon <= 0 or self.R <= 0:
            raise DomainError("epsilon and R must be positive")


@dataclass
class CountResult:
    value: int
    boundary_sensitive: bool = False
    method: str = "brute"


def _sides(T, n) -> tuple:
    T = (float(T),) if np.isscalar(T) else tuple(float(t) for t in T)
    if len(T) != n:
        raise DomainError(f"expected {n} box sides, got {len(T)}")
    if any(not math.isfinite(t) or t < 0 for t in T):
        raise DomainError("box sides must be finite and non-negative")
    return T


def _check_budget(lo, hi):
    size = float(np.prod(np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float) + 1))
    if size > BOX_BUDGET:
        raise CapabilityError(f"box of {size:.3g} points exceeds the budget of {BOX_BUDGET:.0e}")
    return size


def _blocks(a: int, b: int, nblocks: int = N_BLOCKS):
    span = b - a + 1
    k = max(1, min(nblocks, span))
    edges = [a + (span * i) // k for i in range(k + 1)]
    return [(edges[i], edges[i + 1] - 1) for i in range(k) if edges[i + 1] > edges[i]]


def run_blocks(fn, blocks, workers: int = 1):
    """Apply fn to each block, possibly on threads, returning results in order."""
    if workers <= 1 or len(blocks) == 1:
        return [fn(*blk) for blk in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda blk: fn(*blk), blocks))


# ------------------------------------------------------------------ counts


def brute_count_M(L, epsilon, R, T, workers: int = 1) -> int:
    return count_M(CountQuery(L, epsilon, R, T), workers=workers).value


def count_M(query: CountQuery, method: str = "brute", workers: int = 1) -> CountResult:
    """#{(p, q): q != 0, |q_j| <= T_j, |L_i q + p_i| <= R, prod_i |L_i q + p_i| < eps}."""
    if method == "tile":
        return CountResult(tile_count_M(query.L, query.epsilon, query.R, query.T), False, "tile")
    if method != "brute":
        raise DomainError(f"unknown counting method {method!r}")
    tmax = np.floor(np.array(query.T)).astype(np.int64)
    _check_budget(-tmax, tmax)
    L = np.ascontiguousarray(query.L)

    def fn(a, b):
        return kernels.count_m_block(L, float(query.epsilon), float(query.R), tmax, a, b, COMPARE_MARGIN)

    parts = run_blocks(fn, _blocks(-int(tmax[0]), int(tmax[0])), workers)
    return CountResult(int(sum(p[0] for p in parts)), any(p[1] for p in parts), "brute")


def _row_values(L, Q):
    """L_i q for each row of Q, accumulated left to right like the kernel."""
    base = np.zeros((Q.shape[0], L.shape[0]))
    for i in range(L.shape[0]):
        acc = np.zeros(Q.shape[0])
        for j in range(L.shape[1]):
            acc = acc + L[i, j] * Q[:, j]
        base[:, i] = acc
    return base


def _box(tmax, lead=None):
    ranges = [np.arange(-t, t + 1) for t in tmax]
    if lead is not None:
        ranges[0] = np.asarray(lead)
    grids = np.meshgrid(*ranges, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def tile_count_M(L, epsilon, R, T) -> int:
    """The same count as :func:`brute_count_M`, assembled tile by tile.

    Points with every x_i nonzero are counted through the partition of H1+
    (each tile is enumerated inside the preimage of its target cube and the
    candidates are kept only if they are located in that tile).  Points on the
    coordinate slices x_i = 0 are added directly and the q = 0 points removed.
    The partition is built without its R^m / eps > e^m check, since exactness
    of the count does not depend on it.
    """
    L = as_matrix(L)
    m, n = L.shape
    T = _sides(T, n)
    tmax = np.floor(np.array(T)).astype(np.int64)
    _check_budget(-tmax, tmax)
    family = partition_h1(StarBodyH1(m, float(epsilon), float(R)), strict=False)
    total = 0
    slices = 0
    for a, b in _blocks(-int(tmax[0]), int(tmax[0]), 16):
        Q = _box(tmax, np.arange(a, b + 1))
        base = _row_values(L, Q)
        for k in family.indices:
            total += _count_tile(family, k, base)
        slices += _count_slices(base, R)
    plane = 0
    r = int(math.floor(R))
    for p in _box(np.full(m, r)):
        if np.all(np.abs(p) <= R) and float(np.prod(np.abs(p).astype(float))) < epsilon:
            plane += 1
    return int(total + slices - plane)


def _count_tile(family, k, base):
    m = base.shape[1]
    axes = []
    for i in range(m):
        w = family.half_width * math.exp(k[i])
        pmin = np.ceil(-w - base[:, i]).astype(np.int64) - 1
        width = int(math.floor(2 * w)) + 3
        axes.append(base[:, i, None] + (pmin[:, None] + np.arange(width)[None, :]))
    shape = [base.shape[0]] + [ax.shape[1] for ax in axes]
    cols = []
    for i, ax in enumerate(axes):
        view = [base.shape[0]] + [1] * m
        view[i + 1] = ax.shape[1]
        cols.append(np.broadcast_to(ax.reshape(view), shape).ravel())
    X = np.stack(cols, axis=1)
    K, ok = family.locate_many(X)
    return int(np.count_nonzero(ok & np.all(K == np.asarray(k), axis=1)))


def _count_slices(base, R):
    m = base.shape[1]
    full = np.ones(base.shape[0], dtype=np.int64)
    nonzero = np.ones(base.shape[0], dtype=np.int64)
    width = int(math.floor(2 * R)) + 3
    for i in range(m):
        pmin = np.ceil(-R - base[:, i]).astype(np.int64) - 1
        X = base[:, i, None] + (pmin[:, None] + np.arange(width)[None, :])
        inside = np.abs(X) <= R
        zero = inside & (X == 0.0)
        c = inside.sum(axis=1)
        full *= c
        nonzero *= c - zero.sum(axis=1)
    return int((full - nonzero).sum())


# -------------------------------------------------------------------- sums


@dataclass
class SumResult:
    value: float
    bins: tuple = ()
    thresholds: tuple = ()


def _recip_sum(L, T, wmode, thr_lo=math.inf, thr_hi=math.inf, workers=1):
    L = np.ascontiguousarray(as_matrix(L))
    T = _sides(T, L.shape[1])
    hi = np.floor(np.array(T)).astype(np.int64)
    lo = np.zeros_like(hi)
    _check_budget(lo, hi)

    def fn(a, b):
        sums = np.zeros(3)
        comps = np.zeros(3)
        bad = np.zeros(lo.shape[0], dtype=np.int64)
        status = kernels.recip_sum_block(L, lo, hi, a, b, wmode, float(thr_lo), float(thr_hi),
                                         SINGULAR_DISTANCE, sums, comps, bad)
        return status, sums, comps, bad

    parts = run_blocks(fn, _blocks(0, int(hi[0])), workers)
    for status, _, _, bad in parts:
        if status:
            dist = min(abs(float(kernels.form_fraction(L[i], bad))) for i in range(L.shape[0]))
            raise SingularTermError(bad, dist)
    bins = tuple(math.fsum([x for p in parts for x in (p[1][k], p[2][k])]) for k in range(3))
    return bins


def _alpha_vector(alpha) -> np.ndarray:
    a = np.atleast_1d(np.asarray(alpha, dtype=np.float64)).ravel()
    if a.size == 0 or not np.all(np.isfinite(a)):
        raise DomainError("alpha must be a non-empty finite vector")
    return a


def sum_S(alpha, T, workers: int = 1) -> float:
    """sum over q != 0 in prod[0, T_i] of 1 / (q_1^+ ... q_n^+ ||q . alpha||)."""
    a = _alpha_vector(alpha)
    return math.fsum(_recip_sum(a.reshape(1, -1), T, 1, workers=workers))


def sum_S_star(alpha, T, workers: int = 1) -> float:
    """sum over 0 < q <= T of 1 / (q prod_i ||q alpha_i||)."""
    a = _alpha_vector(alpha)
    return math.fsum(_recip_sum(a.reshape(-1, 1), T, 1, workers=workers))


def sum_Sigma(L, T, workers: int = 1) -> float:
    """sum over q != 0 in prod[0, T_j] of 1 / prod_i ||L_i q||."""
    return math.fsum(_recip_sum(L, T, 0, workers=workers))


def _oriented(alpha, T, mode):
    a = _alpha_vector(alpha)
    if mode == "joint":
        return a.reshape(1, -1), _sides(T, a.size)
    if mode == "dual":
        return a.reshape(-1, 1), _sides(T, 1)
    raise DomainError(f"unknown mode {mode!r}")


def count_N(alpha, T, a: float, b: float, mode: str = "joint", workers: int = 1) -> CountResult:
    """#{q in the box: a < q_1 ... q_n ||q . alpha|| <= b} (dual: q prod ||q alpha_i||)."""
    if not 0 <= a < b:
        raise DomainError("need 0 <= a < b")
    L, T = _oriented(alpha, T, mode)
    hi = np.floor(np.array(T)).astype(np.int64)
    lo = np.zeros_like(hi)
    _check_budget(lo, hi)

    def fn(x, y):
        return kernels.window_count_block(L, lo, hi, x, y, 2, float(a), float(b), COMPARE_MARGIN)

    parts = run_blocks(fn, _blocks(0, int(hi[0])), workers)
    return CountResult(int(sum(p[0] for p in parts)), any(p[1] for p in parts), "scan")


@dataclass
class RangeConfig:
    C: Optional[float] = None
    epsilon0: float = 0.1


@dataclass
class RangeSplit:
    small: float
    middle: float
    large: float
    thresholds: tuple

    @property
    def total(self) -> float:
        return math.fsum((self.small, self.middle, self.large))


def range_split(alpha, T, cfg: RangeConfig = None, mode: str = "joint", workers: int = 1) -> RangeSplit:
    """Split the reciprocal sum by the size of its denominator.

    Thresholds are clog^(-n - eps0) and clog^C of the box volume, where
    clog = log max(., e); C defaults to n(n + 1).
    """
    cfg = cfg or RangeConfig()
    L, T = _oriented(alpha, T, mode)
    n = L.shape[0] if mode == "dual" else L.shape[1]
    C = n * (n + 1) if cfg.C is None else cfg.C
    vol = math.prod(T)
    lo = clamped_log(vol) ** (-n - cfg.epsilon0)
    hi = clamped_log(vol) ** C
    bins = _recip_sum(L, T, 1, lo, hi, workers)
    return RangeSplit(bins[0], bins[1], bins[2], (lo, hi))


def dyadic_N_overcount(alpha, T, k: int, mode: str = "joint") -> int:
    """Sum of lattice counts over exponential boxes that dominates N(e^{-k-1}, e^{-k}).

    Joint: boxes h in prod[0, ceil(log T_i)] with sum h >= -k, each contributing
    #M(alpha^t, e^{-k - sum h + n}, 1/2, e^{h_1}, ..., e^{h_n}).
    Dual: 0 <= h <= ceil(log T), h >= -k, contributing #M(alpha, e^{-k-h+1}, 1/2, e^h).
    """
    L, T = _oriented(alpha, T, mode)
    tops = [math.ceil(math.log(t)) if t > 1 else 0 for t in T]
    total = 0
    if mode == "joint":
        n = L.shape[1]
        for h in np.ndindex(*[t + 1 for t in tops]):
            s = sum(h)
            if s < -k:
                continue
            total += brute_count_M(L, math.exp(-k - s + n), 0.5, [math.exp(v) for v in h])
    else:
        for h in range(max(0, -k), tops[0] + 1):
            total += brute_count_M(L, math.exp(-k - h + 1), 0.5, [math.exp(h)])
    return total
