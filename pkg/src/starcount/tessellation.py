"""Star bodies, their tessellations by diagonal maps, and the cube rescaling.

Two families are built here:

* ``partition_h1``: a partition of the punctured hyperbolic star body
  {prod |x_i| < eps, |x_i| <= R, x_i != 0} into tiles, each sent into a small
  cube by a diagonal map of determinant one.
* ``tessellate_h2``: a covering of the slab {prod |x_i| <= eps, |x_0| <= R,
  1 <= |x_i| <= T_i} by tiles sent into (0, eps] x [1, e]^n.

Both work in logarithmic coordinates and translate by integer vectors, so the
exponents of every tile map are integers summing to exactly zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .scalar import geo_mean

_LOG_EPS = 1e-12


@dataclass(frozen=True)
class StarBodyH1:
    m: int
    epsilon: float
    R: float

    def __post_init__(self):
        if self.m < 1 or self.epsilon <= 0 or self.R <= 0:
            raise DomainError("need m >= 1, epsilon > 0, R > 0")

    @property
    def log_ratio(self) -> float:
        """log(R / eps^(1/m))."""
        return math.log(self.R) - math.log(self.epsilon) / self.m


@dataclass(frozen=True)
class SlabDomainH2:
    n: int
    epsilon: float
    R: float
    T: tuple

    def __post_init__(self):
        object.__setattr__(self, "T", tuple(float(t) for t in self.T))
        if len(self.T) != self.n:
            raise DomainError(f"expected {self.n} box sides, got {len(self.T)}")
        if self.epsilon <= 0 or not (0 < self.R <= 1) or any(t < 1 for t in self.T):
            raise DomainError("need epsilon > 0, 0 < R <= 1, T_i >= 1")


@dataclass(frozen=True)
class DiagonalMap:
    """x_i -> signs[i] * exp(exponents[i]) * x_i."""

    exponents: tuple
    signs: tuple = None

    def __post_init__(self):
        if self.signs is None:
            object.__setattr__(self, "signs", (1,) * len(self.exponents))

    @property
    def integral(self) -> bool:
        return all(isinstance(a, (int, np.integer)) for a in self.exponents)

    @property
    def exponent_sum(self):
        if self.integral:
            return sum(int(a) for a in self.exponents)
        return math.fsum(self.exponents)

    @property
    def scales(self) -> np.ndarray:
        return np.array(self.signs, dtype=float) * np.exp(np.array(self.exponents, dtype=float))

    def det(self) -> float:
        sign = int(np.prod(self.signs))
        if self.integral and self.exponent_sum == 0:
            return float(sign)
        return sign * math.exp(self.exponent_sum)

    def apply(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) * self.scales

    def compose(self, other: "DiagonalMap") -> "DiagonalMap":
        """self after other."""
        exps = tuple(a + b for a, b in zip(self.exponents, other.exponents))
        signs = tuple(a * b for a, b in zip(self.signs, other.signs))
        return DiagonalMap(exps, signs)


def star_member(point, domain, variant: str = "full", index: Optional[int] = None) -> bool:
    """Evaluate the defining inequalities of H1 or H2.

    ``variant`` is ``full``, ``plus`` (all coordinates nonzero) or ``slice``
    (coordinate ``index`` equal to zero).
    """
    x = np.asarray(point, dtype=float).ravel()
    if isinstance(domain, StarBodyH1):
        if x.shape[0] != domain.m:
            raise DomainError(f"point has dimension {x.shape[0]}, body has {domain.m}")
        ok = bool(np.all(np.abs(x) <= domain.R)) and float(np.prod(np.abs(x))) < domain.epsilon
    elif isinstance(domain, SlabDomainH2):
        if x.shape[0] != domain.n + 1:
            raise DomainError(f"point has dimension {x.shape[0]}, slab has {domain.n + 1}")
        ax = np.abs(x)
        ok = (float(np.prod(ax)) <= domain.epsilon and ax[0] <= domain.R
              and bool(np.all(ax[1:] >= 1)) and bool(np.all(ax[1:] <= np.array(domain.T))))
    else:
        raise DomainError(f"unknown domain {type(domain).__name__}")
    if variant == "full":
        return ok
    if variant == "plus":
        return ok and bool(np.all(x != 0))
    if variant == "slice":
        if index is None or not 0 <= index < x.shape[0]:
            raise DomainError("slice variant needs a valid coordinate index")
        return ok and x[index] == 0
    raise DomainError(f"unknown variant {variant!r}")


class TileFamily:
    """Finite family of tiles with a diagonal map per tile."""

    indices: list
    half_width: float

    def map_of(self, index) -> DiagonalMap:
        raise NotImplementedError

    def locate(self, point):
        raise NotImplementedError

    def __len__(self):
        return len(self.indices)


class H1Partition(TileFamily):
    """Partition of the punctured body H1+ by integer translations in log space.

    With u_i = log(|x_i| / eps^(1/m)) every point satisfies u_i <= lam and
    sum u_i < 0.  The tile index k in Z^m (sum k = 0) starts from
    ceil(u_i) - 1, is clamped below at -M with M = (m-1) * ceil(lam), and any
    negative total is pushed back to zero by raising coordinates round-robin
    up to ceil(lam).  Then u_i - k_i <= 1, so the map x_i -> e^{-k_i} x_i lands
    in the cube of half-width e * eps^(1/m).
    """

    def __init__(self, body: StarBodyH1, strict: bool = True):
        # The construction only needs cap >= 0; strict mode enforces the
        # R^m / eps > e^m regime where the tile-count bound is meaningful.
        if strict and body.log_ratio <= 1.0:
            raise DomainError("partition needs R^m / eps > e^m")
        self.body = body
        self.m = body.m
        self.lam = body.log_ratio
        self.cap = max(math.ceil(self.lam - _LOG_EPS), 0)
        self.floor_k = -(self.m - 1) * self.cap
        self.root = body.epsilon ** (1.0 / self.m)
        self.half_width = math.e * self.root
        self.c = math.e
        self.c_lower = math.exp(-self.cap) * body.R / self.root
        rng = range(self.floor_k, self.cap + 1)
        if self.m == 1:
            self.indices = [(0,)]
        else:
            self.indices = [k + (-sum(k),) for k in itertools.product(rng, repeat=self.m - 1)
                            if self.floor_k <= -sum(k) <= self.cap]
        self.index_set = set(self.indices)

    @property
    def count_constant(self) -> float:
        return len(self.indices) / max(self.lam, 1.0) ** (self.m - 1)

    def map_of(self, index) -> DiagonalMap:
        if tuple(index) not in self.index_set:
            raise DomainError(f"{index} is not a tile index")
        return DiagonalMap(tuple(-int(k) for k in index))

    def inside(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A = np.abs(X)
        prod = np.ones(X.shape[0])
        for i in range(self.m):
            prod = prod * A[:, i]
        return np.all(A <= self.body.R, axis=1) & np.all(A > 0, axis=1) & (prod < self.body.epsilon)

    def locate_many(self, X):
        """Tile indices (rows) for points X; mask marks points of H1+."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ok = self.inside(X)
        K = np.zeros(X.shape, dtype=np.int64)
        if not ok.any():
            return K, ok
        with np.errstate(divide="ignore"):
            U = np.log(np.abs(X[ok])) - math.log(self.body.epsilon) / self.m
        k = np.maximum(np.ceil(U).astype(np.int64) - 1, self.floor_k)
        deficit = -k.sum(axis=1)
        while np.any(deficit > 0):
            for i in range(self.m):
                can = (deficit > 0) & (k[:, i] < self.cap)
                k[can, i] += 1
                deficit[can] -= 1
        K[ok] = k
        return K, ok

    def locate(self, point):
        K, ok = self.locate_many(np.asarray(point, dtype=float).reshape(1, -1))
        return tuple(int(v) for v in K[0]) if ok[0] else None

    def tile_contains(self, index, point) -> bool:
        return self.locate(point) == tuple(index)


def partition_h1(body: StarBodyH1, strict: bool = True) -> H1Partition:
    return H1Partition(body, strict)


class H2Covering(TileFamily):
    """Covering of the punctured slab by dyadic-in-e boxes in log space.

    Index (b, tag): b_i in {0, ..., floor(log T_i)} and tag in {+1, -1}^n giving
    the sign of x_i relative to x_0.  Points with x_0 < 0 are handled through
    the central symmetry x -> -x; ``locate`` reports that as parity -1.
    """

    def __init__(self, domain: SlabDomainH2):
        if domain.epsilon >= domain.R * math.prod(domain.T):
            raise DomainError("covering needs eps < R * T_1 ... T_n")
        self.domain = domain
        self.n = domain.n
        self.tops = [int(math.floor(math.log(t) + _LOG_EPS)) for t in domain.T]
        grid = itertools.product(*[range(t + 1) for t in self.tops])
        tags = list(itertools.product((1, -1), repeat=self.n))
        self.indices = [(b, tag) for b in grid for tag in tags]
        self.index_set = set(self.indices)
        self.half_width = domain.epsilon

    def map_of(self, index) -> DiagonalMap:
        b, tag = index
        if (tuple(b), tuple(tag)) not in self.index_set:
            raise DomainError(f"{index} is not a tile index")
        return DiagonalMap((sum(b),) + tuple(-int(v) for v in b), (1,) + tuple(tag))

    def locate(self, point):
        """Return ((b, tag), parity) or None for points outside H2+."""
        x = np.asarray(point, dtype=float).ravel()
        if not star_member(x, self.domain, "plus"):
            return None
        parity = 1 if x[0] > 0 else -1
        y = parity * x
        b = tuple(max(math.ceil(math.log(abs(v))) - 1, 0) for v in y[1:])
        tag = tuple(1 if v > 0 else -1 for v in y[1:])
        return (b, tag), parity

    def image(self, point):
        found = self.locate(point)
        if found is None:
            raise DomainError("point is outside the slab")
        index, parity = found
        return self.map_of(index).apply(parity * np.asarray(point, dtype=float))


def tessellate_h2(domain: SlabDomainH2) -> H2Covering:
    return H2Covering(domain)


def cube_scaling(epsilon: float, T: Sequence[float], m: int, n: int):
    """Maps sending [-eps^(1/m), eps^(1/m)]^m x prod[-T_j, T_j] onto a cube.

    Returns (omega1, omega2, theta).  omega1 equalises the box sides to the
    geometric mean and omega2 trades the two blocks against each other.
    """
    T = [float(t) for t in T]
    if epsilon <= 0 or len(T) != n or any(t < 1 for t in T):
        raise DomainError("need epsilon > 0 and n sides T_j >= 1")
    tbar = geo_mean(T)
    theta = (epsilon * tbar ** n) ** (1.0 / (m + n)) / epsilon ** (1.0 / m)
    w1 = DiagonalMap((0.0,) * m + tuple(math.log(tbar / t) for t in T))
    lt = math.log(theta)
    w2 = DiagonalMap((lt,) * m + (-m * lt / n,) * n)
    return w1, w2, theta
