"""Exact weight schedule attached to a 0/1 support matrix.

Row s of the support matrix t records which of the n trailing coordinates the
s-th basis vector touches.  Rows are prefixes of ones and nested.  From t we
build weights k_s and the partial sums alpha_s = sum_{i<=s} 1/k_i,
alpha_sj = sum_{i<=s} t_ij / k_i, all as exact fractions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .lattice import (LatticeBasis, as_matrix, assemble_lattice, exact_successive_minima,
                      support_monotone_basis, support_triangular_permutation)
from .scalar import geo_mean
from .tessellation import StarBodyH1, cube_scaling, partition_h1


class SupportInvariantError(DomainError):
    """A support matrix violates one of its structural invariants."""

    def __init__(self, invariant: str, row: int, detail: str = ""):
        self.invariant = invariant
        self.row = row
        super().__init__(f"{invariant} violated in row {row + 1}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class SupportMatrix:
    m: int
    n: int
    t: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.t)
        object.__setattr__(self, "t", rows)
        self.validate()

    @property
    def rows(self) -> int:
        return len(self.t)

    def h(self, s: int) -> int:
        """Largest j (1-based) with t_sj = 1; s is 0-based."""
        row = self.t[s]
        return max((j + 1 for j, v in enumerate(row) if v), default=0)

    def validate(self):
        m, n = self.m, self.n
        if m < 1 or n < 1:
            raise DomainError("need m, n >= 1")
        if self.rows < 1 or self.rows > m + n - 1:
            raise DomainError(f"need between 1 and {m + n - 1} rows, got {self.rows}")
        prev = None
        for s, row in enumerate(self.t):
            if len(row) != n or any(v not in (0, 1) for v in row):
                raise SupportInvariantError("0/1 row of length n", s)
            h = sum(row)
            if any(row[j] != (1 if j < h else 0) for j in range(n)):
                raise SupportInvariantError("row-triangular", s, f"row {row} is not a prefix of ones")
            if row[0] != 1:
                raise SupportInvariantError("first column is one", s)
            if prev is not None and h < sum(prev):
                raise SupportInvariantError("nested rows", s, "support shrinks")
            if h < max(1, (s + 1) + 1 - m):
                raise SupportInvariantError("support lower bound", s, f"h={h} below {(s + 1) + 1 - m}")
            prev = row


@dataclass
class WeightSchedule:
    m: int
    n: int
    k: tuple
    alpha: tuple
    alpha_j: tuple  # alpha_j[s][j] = alpha_{s, j+1}


def build_schedule(t: SupportMatrix, sigma: Optional[int] = None) -> WeightSchedule:
    """Weights for rows 1..sigma (default: all rows).

    k_s = m + h_s for s <= m and, beyond that,
    k_s = (m + h_s) / (1 - sum_{i<s} (1 - t_{i, s+1-m}) / k_i).
    """
    m, n = t.m, t.n
    sigma = t.rows if sigma is None else sigma
    if not 1 <= sigma <= t.rows:
        raise DomainError(f"sigma must lie in 1..{t.rows}")
    k = []
    for s in range(1, sigma + 1):
        hs = t.h(s - 1)
        if s <= m:
            k.append(Fraction(m + hs))
            continue
        col = s + 1 - m  # 1-based column index
        denom = 1 - sum((1 - t.t[i][col - 1]) / k[i] for i in range(s - 1))
        if denom <= 0:
            raise DomainError(f"weight denominator {denom} is not positive at s={s}")
        k.append(Fraction(m + hs) / denom)
    alpha, alpha_j = [], []
    acc = Fraction(0)
    accj = [Fraction(0)] * n
    for s in range(sigma):
        acc += 1 / k[s]
        accj = [a + Fraction(t.t[s][j]) / k[s] for j, a in enumerate(accj)]
        alpha.append(acc)
        alpha_j.append(tuple(accj))
    return WeightSchedule(m, n, tuple(k), tuple(alpha), tuple(alpha_j))


@dataclass
class IdentityCheck:
    ok: bool
    failures: list


def verify_identities(t: SupportMatrix, sched: WeightSchedule) -> IdentityCheck:
    """k_s >= m + h_s, and alpha_s (s+1) + sum_{j > s+1-m} alpha_sj = s for s >= m."""
    failures = []
    m = t.m
    for s in range(1, len(sched.k) + 1):
        if sched.k[s - 1] < m + t.h(s - 1):
            failures.append(("lower bound", s))
        if s >= m:
            lhs = sched.alpha[s - 1] * (s + 1) + sum(sched.alpha_j[s - 1][j - 1]
                                                     for j in range(s + 2 - m, t.n + 1))
            if lhs != s:
                failures.append(("identity", s, lhs))
            if sched.alpha[s - 1] > Fraction(s, s + 1):
                failures.append(("alpha bound", s))
    return IdentityCheck(not failures, failures)


def random_support_matrix(m: int, n: int, rng: random.Random) -> SupportMatrix:
    """Uniform-ish valid support matrix: non-decreasing prefix lengths above the floor."""
    rows = m + n - 1
    h = []
    prev = 1
    for s in range(1, rows + 1):
        low = max(prev, 1, s + 1 - m)
        cur = rng.randint(low, n)
        h.append(cur)
        prev = cur
    return SupportMatrix(m, n, tuple(tuple(1 if j < hs else 0 for j in range(n)) for hs in h))


def support_matrix_from_supports(supports: Sequence, m: int, n: int) -> SupportMatrix:
    """Rows t_sj = 1 iff coordinate m + j lies in the s-th support (0-based coordinates)."""
    rows = [tuple(1 if (m + j) in supp else 0 for j in range(n)) for supp in supports[: m + n - 1]]
    return SupportMatrix(m, n, tuple(rows))


def parse_support_csv(text: str, m: int) -> SupportMatrix:
    rows = [tuple(int(v) for v in line.replace(" ", "").split(",")) for line in text.strip().splitlines()
            if line.strip()]
    if not rows:
        raise DomainError("empty support matrix")
    return SupportMatrix(m, len(rows[0]), tuple(rows))


# ------------------------------------------------ minima products on tiles


@dataclass
class MinimaCheckReport:
    max_ratio: float
    ratios: dict
    rhs: float
    theta: float
    skipped: bool = False
    note: str = ""
    schedule_ok: Optional[bool] = None


def _product_rhs(m, n, epsilon, R, tbar, phi_val):
    v = epsilon * tbar ** n
    return 1 + R ** (m + n - 1) + v + (v / phi_val) ** ((m + n - 1) / (m + n))


def minima_product_check(L, phi, epsilon: float, R: float, T, beta=None) -> MinimaCheckReport:
    """Compare products of successive minima of the rescaled lattice with the bound.

    The lattice is omega2(omega1(phi_beta(Lambda_L))) for each tile beta of the
    H1 partition (``beta="identity"`` uses the identity in place of phi_beta).
    For every sigma the ratio (eps Tbar^n)^{sigma/(m+n)} / (delta_1 ... delta_sigma)
    over 1 + R^{m+n-1} + eps Tbar^n + (eps Tbar^n / phi(Tbar))^{(m+n-1)/(m+n)}
    is recorded.
    """
    L = as_matrix(L)
    m, n = L.shape
    if m + n > 6:
        raise DomainError("minima products are limited to m + n <= 6")
    tbar = geo_mean(T)
    vol = epsilon * tbar ** n
    rhs = _product_rhs(m, n, epsilon, R, tbar, phi(tbar))
    w1, w2, theta = cube_scaling(epsilon, T, m, n)
    if vol / phi(tbar) < 1:
        return MinimaCheckReport(0.0, {}, rhs, theta, True, "eps Tbar^n / phi(Tbar) < 1: no points, check skipped")
    if beta == "identity":
        tiles = [("identity", np.zeros(m))]
    else:
        family = partition_h1(StarBodyH1(m, epsilon, R))
        chosen = family.indices if beta is None else [tuple(beta)]
        tiles = [(k, np.array(family.map_of(k).exponents, dtype=float)) for k in chosen]
    base = assemble_lattice(L).matrix
    ratios = {}
    sched_ok = True
    for key, a in tiles:
        scale = w2.scales * w1.scales * np.concatenate([np.exp(a), np.ones(n)])
        basis = LatticeBasis(scale[:, None] * base, {"tile": key})
        prof = exact_successive_minima(basis)
        prod = 1.0
        for s, delta in enumerate(prof.minima, start=1):
            prod *= delta
            ratios[(key, s)] = vol ** (s / (m + n)) / prod / rhs
        try:
            mono = support_monotone_basis(prof)
            perm = support_triangular_permutation(supports=mono.supports, m=m, dim=m + n)
            t = support_matrix_from_supports(perm.supports, m, n)
            sched_ok &= verify_identities(t, build_schedule(t)).ok
        except DomainError:
            pass
    return MinimaCheckReport(max(ratios.values()), ratios, rhs, theta, False, "", sched_ok)
