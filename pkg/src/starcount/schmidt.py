"""Dyadic interval families and an empirical harness for moment bounds.

The family of level s consists of the integer intervals (2^a b, 2^a (b+1)]
lying below 2^s.  Any prefix (0, k] with k < 2^s is a disjoint union of at
most s of them, read off from the binary expansion of k.  Summing |interval
sums| over the whole family controls every prefix sum at once, which is what
the moment checks below measure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CapabilityError, DomainError
from .rng import make_rng

MAX_LEVEL = 30


@dataclass(frozen=True, order=True)
class DyadicInterval:
    a: int
    b: int

    @property
    def lo(self) -> int:
        return self.b << self.a

    @property
    def hi(self) -> int:
        return (self.b + 1) << self.a

    def __len__(self):
        return 1 << self.a

    def integers(self) -> range:
        return range(self.lo + 1, self.hi + 1)

    def __repr__(self):
        return f"({self.lo},{self.hi}]"


class DyadicFamily(Sequence):
    """All intervals of level s, stored as parallel arrays of (a, b)."""

    def __init__(self, s: int):
        if s < 1:
            raise DomainError("level s must be at least 1")
        if s > MAX_LEVEL:
            raise CapabilityError(f"level s is limited to {MAX_LEVEL}")
        self.s = s
        a_parts, b_parts = [], []
        for a in range(s):
            nb = (1 << (s - a)) - 1
            if nb > 0:
                a_parts.append(np.full(nb, a, dtype=np.int64))
                b_parts.append(np.arange(nb, dtype=np.int64))
        self.a = np.concatenate(a_parts)
        self.b = np.concatenate(b_parts)

    @property
    def lo(self) -> np.ndarray:
        return self.b << self.a

    @property
    def hi(self) -> np.ndarray:
        return (self.b + 1) << self.a

    def __len__(self):
        return int(self.a.size)

    def __getitem__(self, i):
        return DyadicInterval(int(self.a[i]), int(self.b[i]))

    def __contains__(self, iv):
        return isinstance(iv, DyadicInterval) and iv.b >= 0 and iv.hi < (1 << self.s)


def dyadic_family(s: int) -> DyadicFamily:
    return DyadicFamily(s)


def dyadic_family_size(s: int) -> int:
    return (1 << (s + 1)) - s - 2


def cover_prefix(k: int, s: int) -> list:
    """Disjoint intervals of level s whose union is the integer set (0, k]."""
    if not 0 <= k < (1 << s):
        raise DomainError(f"need 0 <= k < 2^{s}, got {k}")
    out = []
    c = 0
    for a in range(s - 1, -1, -1):
        if k >> a & 1:
            out.append(DyadicInterval(a, c >> a))
            c += 1 << a
    return out


# ------------------------------------------------------------------ families


@dataclass
class MomentFamily:
    """Functions f_n(y), n in [1, 2^{s_i}) per axis, over a sampled space.

    ``table(ys, sizes)`` returns an array of shape (len(ys), *sizes) holding
    f_n(y) for n_i = 1..sizes[i].  ``g`` is the premise function and ``C_g`` its
    doubling constant, g(2x) <= 2 C_g g(x).
    """

    name: str
    dimension: int
    table: Callable
    sampler: Callable
    g: Callable = lambda x: 1.0
    C_g: float = 0.5
    deterministic: bool = False
    params: dict = field(default_factory=dict)


def _grid(sizes):
    axes = [np.arange(1, n + 1) for n in sizes]
    return np.meshgrid(*axes, indexing="ij")


def _no_sample(rng, count):
    return np.zeros((count, 1))


def const_family(d: int = 1, value: float = 1.0) -> MomentFamily:
    def table(ys, sizes):
        return np.full((len(ys),) + tuple(sizes), value, dtype=float)

    return MomentFamily("const" if value else "zero", d, table, _no_sample, deterministic=True)


def alternating_family(d: int = 1) -> MomentFamily:
    def table(ys, sizes):
        parity = sum(_grid(sizes)) % 2
        return np.broadcast_to(np.where(parity == 0, 1.0, -1.0), (len(ys),) + tuple(sizes)).copy()

    return MomentFamily("alt", d, table, _no_sample, deterministic=True)


def random_sign_family(d: int = 1) -> MomentFamily:
    """Independent random signs; the sample y is the seed of the sign field."""

    def sampler(rng, count):
        return rng.integers(0, 2**63 - 1, size=(count, 1))

    def table(ys, sizes):
        out = np.empty((len(ys),) + tuple(sizes))
        for i, y in enumerate(ys):
            out[i] = make_rng(int(y[0])).choice((-1.0, 1.0), size=tuple(sizes))
        return out

    return MomentFamily("sign", d, table, sampler)


def power_family(r: float, random_sign: bool = False) -> MomentFamily:
    """One-dimensional f_n = n^r - (n-1)^r, optionally times a random sign per sample."""

    def sampler(rng, count):
        if not random_sign:
            return np.ones((count, 1))
        return rng.choice((-1.0, 1.0), size=(count, 1))

    def table(ys, sizes):
        n = np.arange(1, sizes[0] + 1, dtype=float)
        base = n ** r - (n - 1) ** r
        return np.asarray(ys)[:, :1] * base[None, :]

    return MomentFamily(f"power{r:g}", 1, table, sampler, deterministic=not random_sign, params={"r": r})


def lattice_family(n: int = 1, epsilon: float = 0.1) -> MomentFamily:
    """f_b(alpha) = #(Lambda_{alpha^t} cap Y_b) / epsilon for the slab tiles with positive tag.

    The tile with grid index b = (n_1 - 1, ..., n_d - 1) holds the points
    (p + q . alpha, q) with q_i in [e^{b_i}, e^{b_i + 1}] and
    0 < p + q . alpha <= eps e^{-sum b}.  Its expected size is below 2^n eps.
    """

    def sampler(rng, count):
        return rng.random((count, n))

    def table(ys, sizes):
        out = np.zeros((len(ys),) + tuple(sizes))
        for b in itertools.product(*[range(k) for k in sizes]):
            out[(slice(None),) + b] = tile_counts(np.asarray(ys), b, epsilon) / epsilon
        return out

    return MomentFamily("lattice", n, table, sampler, g=lambda x: float(2 ** n), C_g=0.5,
                        params={"epsilon": epsilon})


def tile_counts(alphas: np.ndarray, b: Sequence[int], epsilon: float, tag: Sequence[int] = None) -> np.ndarray:
    """Per-sample #(Lambda_{alpha^t} cap Y_(b, tag)) for the slab covering.

    Y_(b, tag) = {x : 0 < x_0 <= eps e^{-sum b}, tag_i x_i in [e^{b_i}, e^{b_i+1}]}.
    """
    alphas = np.atleast_2d(alphas)
    n = alphas.shape[1]
    tag = (1,) * n if tag is None else tuple(tag)
    ranges = []
    for bi, ti in zip(b, tag):
        lo = math.ceil(math.exp(bi) - 1e-12)
        hi = math.floor(math.exp(bi + 1) + 1e-12)
        ranges.append(ti * np.arange(lo, hi + 1))
    Q = np.stack([g.ravel() for g in np.meshgrid(*ranges, indexing="ij")], axis=1).astype(float)
    delta = epsilon * math.exp(-sum(b))
    frac = np.mod(alphas @ Q.T, 1.0)
    first = np.where(frac > 0, 1.0 - frac, 1.0)  # smallest positive x_0 on each line
    counts = np.where(delta >= first, np.floor(delta - first) + 1, 0.0)
    return counts.sum(axis=1)


def h1_slab_counts(alphas: np.ndarray, epsilon: float, R: float, T: int) -> np.ndarray:
    """Per-sample #(Lambda_alpha cap H1 x [1, T]) with R <= 1/2."""
    if R > 0.5:
        raise DomainError("h1_slab_counts assumes R <= 1/2")
    alphas = np.atleast_2d(alphas)
    q = np.arange(1, int(T) + 1, dtype=float)
    out = np.zeros(alphas.shape[0])
    for k, a in enumerate(alphas):
        x = np.outer(q, a)
        d = np.abs(x - np.rint(x))
        ok = np.all(d <= R, axis=1) & (np.prod(d, axis=1) < epsilon)
        out[k] = np.count_nonzero(ok)
    return out


FAMILIES = {
    "const": const_family,
    "zero": lambda d=1: const_family(d, 0.0),
    "alt": alternating_family,
    "sign": random_sign_family,
    "lattice": lambda d=1: lattice_family(d),
}


# ------------------------------------------------------------------- checks


def _merge_stats(chunks):
    """Chan et al. pairwise merge of (count, mean, M2), in order."""
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in chunks:
        if nb == 0:
            continue
        delta = mb - mean
        tot = n + nb
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def _family_sums(fam: MomentFamily, s: Sequence[int], ys: np.ndarray) -> np.ndarray:
    """X(y) = sum over interval tuples of |sum of f over the box|, per sample."""
    sizes = [(1 << si) - 1 for si in s]
    F = fam.table(ys, sizes)
    P = F
    for ax in range(1, F.ndim):
        P = np.cumsum(P, axis=ax)
    P = np.pad(P, [(0, 0)] + [(1, 0)] * len(s))
    fams = [dyadic_family(si) for si in s]
    d = len(s)
    idx_lo = [f.lo for f in fams]
    idx_hi = [f.hi for f in fams]
    # inclusion-exclusion over the 2^d corners, tuples broadcast on a d-dim grid
    box = np.zeros((len(ys),) + tuple(len(f) for f in fams))
    for corner in itertools.product((0, 1), repeat=d):
        sign = (-1) ** (d - sum(corner))
        index = [slice(None)]
        for ax, c in enumerate(corner):
            arr = idx_hi[ax] if c else idx_lo[ax]
            shape = [1] * d
            shape[ax] = arr.size
            index.append(arr.reshape(shape))
        box += sign * P[tuple(index)]
    return np.abs(box).reshape(len(ys), -1).sum(axis=1)


def _sample(fam, samples, seed):
    rng = make_rng(seed)
    return fam.sampler(rng, 1 if fam.deterministic else samples)


@dataclass
class MomentReport:
    lhs: float
    stderr: float
    bound: float
    ratio: float
    ratio_stderr: float
    samples: int
    seed: int


def moment_sum_check(fam: MomentFamily, s, samples: int = 1000, seed: int = 0, r: float = 1.0,
                     chunk: int = 250) -> MomentReport:
    """Mean over y of the family sum, against g(2^{sum s}) s_1...s_d 2^{sum s}.

    With r != 1 (d = 1) the bound is g(2^s) s 2^{rs}.
    """
    s = [int(v) for v in np.atleast_1d(s)]
    if len(s) != fam.dimension:
        raise DomainError(f"family has dimension {fam.dimension}, got {len(s)} levels")
    if r != 1 and len(s) != 1:
        raise DomainError("power weighting is one-dimensional")
    ys = _sample(fam, samples, seed)
    stats = []
    for i in range(0, len(ys), chunk):
        x = _family_sums(fam, s, ys[i:i + chunk])
        stats.append((x.size, float(x.mean()), float(((x - x.mean()) ** 2).sum())))
    n, mean, m2 = _merge_stats(stats)
    se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    S = sum(s)
    if r == 1:
        bound = fam.g(2.0 ** S) * math.prod(s) * 2.0 ** S
    else:
        bound = fam.g(2.0 ** S) * S * 2.0 ** (r * S)
    return MomentReport(mean, se, bound, mean / bound, se / bound, n, seed)


@dataclass
class ExceptionalReport:
    measure: float
    stderr: float
    threshold: float
    allowed: float
    within: bool
    pointwise_ok: bool
    cover_ok: bool
    samples: int
    seed: int


def exceptional_set_estimate(fam: MomentFamily, s, eta: float, samples: int = 1000,
                             seed: int = 0) -> ExceptionalReport:
    """Sampled measure of {X(y) >= g(2^{sum s}) (s_1...s_d)^{2+eta} 2^{sum s}}.

    For up to 50 sampled y outside that set every prefix sum over n <= N
    (N_i < 2^{s_i}) is checked to stay below the threshold, and each prefix sum
    is recomputed from its dyadic cover.
    """
    if eta <= 0:
        raise DomainError("eta must be positive")
    s = [int(v) for v in np.atleast_1d(s)]
    ys = _sample(fam, samples, seed)
    X = _family_sums(fam, s, ys)
    S = sum(s)
    prod_s = math.prod(s)
    thr = fam.g(2.0 ** S) * prod_s ** (2 + eta) * 2.0 ** S
    bad = X >= thr
    p = float(bad.mean())
    n = len(ys)
    se = math.sqrt(p * (1 - p) / n)
    allowed = prod_s ** (-1 - eta)
    sizes = [(1 << si) - 1 for si in s]
    good = ys[~bad]
    pointwise_ok, cover_ok = True, True
    if len(good):
        F = fam.table(good[: min(len(good), 50)], sizes)
        P = F
        for ax in range(1, F.ndim):
            P = np.cumsum(P, axis=ax)
        pointwise_ok = bool(np.all(np.abs(P) < thr))
        cover_ok = _covers_reproduce(F, P, s)
    return ExceptionalReport(p, se, thr, allowed, p <= allowed + 3 * se, pointwise_ok, cover_ok, n, seed)


def _covers_reproduce(F, P, s) -> bool:
    """Sum over the product of prefix covers equals the direct prefix sum."""
    for N in itertools.product(*[range(1, (1 << si)) for si in s]):
        covers = [cover_prefix(k, si) for k, si in zip(N, s)]
        acc = np.zeros(F.shape[0])
        for tup in itertools.product(*covers):
            sl = (slice(None),) + tuple(slice(iv.lo, iv.hi) for iv in tup)
            acc += F[sl].reshape(F.shape[0], -1).sum(axis=1)
        direct = P[(slice(None),) + tuple(k - 1 for k in N)]
        if not np.allclose(acc, direct, rtol=1e-12, atol=1e-9):
            return False
    return True
