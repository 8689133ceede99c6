"""Closed-form right-hand sides and classical lower bounds, constant 1 throughout."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .certify import PhiSpec
from .counting import brute_count_M, sum_Sigma
from .errors import DomainError
from .lattice import as_matrix
from .scalar import clamped_log, geo_mean


@dataclass(frozen=True)
class BoundQuery:
    m: int
    n: int
    epsilon: float
    R: float
    T: tuple
    phi: PhiSpec


def rhs_main_theorem(q: BoundQuery) -> float:
    """(1+R)^{m+n-1} log(R^m/eps)^{m-1} [eps Tbar^n + (eps Tbar^n / phi(Tbar))^{(m+n-1)/(m+n)}]."""
    m, n = q.m, q.n
    if q.epsilon <= 0 or q.R <= 0:
        raise DomainError("epsilon and R must be positive")
    ratio = q.R ** m / q.epsilon
    if ratio < math.e ** m * (1 - 1e-12):
        raise DomainError(f"need R^m / eps >= e^m, got {ratio:.6g}")
    tbar = geo_mean(q.T)
    v = q.epsilon * tbar ** n
    bracket = v + (v / q.phi(tbar)) ** ((m + n - 1) / (m + n))
    return (1 + q.R) ** (m + n - 1) * math.log(ratio) ** (m - 1) * bracket


def rhs_sigma_theorem(m: int, n: int, T: Sequence[float], phi: PhiSpec) -> float:
    """Tbar^n log(Tbar/phi)^m + (Tbar^n / phi) log(Tbar/phi)^{m-1}, phi = phi(Tbar)."""
    tbar = geo_mean(T)
    if tbar < 2 * (1 - 1e-12):
        raise DomainError(f"need Tbar >= 2, got {tbar:.6g}")
    p = phi(tbar)
    lg = math.log(tbar / p)
    return tbar ** n * lg ** m + tbar ** n / p * lg ** (m - 1)


def lower_bound(kind: str, T, n: int = 1) -> float:
    """Known growth rates.

    bhv: clog(Tbar) prod clog(T_i); lv: T clog(T)^{n+1}; kruse: clog(T)^2.
    """
    if kind == "bhv":
        T = [float(t) for t in T]
        return clamped_log(geo_mean(T)) * math.prod(clamped_log(t) for t in T)
    T = float(T if not isinstance(T, (list, tuple)) else T[0])
    if kind == "lv":
        return T * clamped_log(T) ** (n + 1)
    if kind == "kruse":
        return clamped_log(T) ** 2
    raise DomainError(f"unknown lower bound {kind!r}")


@dataclass
class ChainResult:
    value: float
    K: int
    terms: tuple


def dyadic_sigma_chain(L, T, phi: PhiSpec, workers: int = 1) -> ChainResult:
    """sum_{k=0}^{K} 2^{k+1} #M(L, 2^{-k}, 1/2, T), K = floor(log2(Tbar^n / phi(Tbar)))."""
    L = as_matrix(L)
    n = L.shape[1]
    tbar = geo_mean(T)
    top = tbar ** n / phi(tbar)
    if top < 1:
        return ChainResult(0.0, -1, ())
    K = int(math.floor(math.log2(top)))
    terms = tuple(2 ** (k + 1) * brute_count_M(L, 2.0 ** (-k), 0.5, T, workers=workers) for k in range(K + 1))
    return ChainResult(float(sum(terms)), K, terms)
