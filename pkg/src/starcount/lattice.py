"""Lattices attached to a linear form, exact successive minima, support bookkeeping.

A basis is stored column-wise: ``matrix[:, s]`` is the s-th basis vector.
Integer coefficient vectors are kept as Python ints wherever exactness matters
(rank tests, unimodularity, basis completion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import CapabilityError, DomainError, InternalError

MAX_EXACT_DIM = 8
LOVASZ_DELTA = 0.99
RADIUS_SLACK = 1e-9
MAX_RADIUS_DOUBLINGS = 3
# Relative size below which a computed coordinate counts as an exact zero.
_SUPPORT_REL_TOL = 64 * np.finfo(np.float64).eps


def as_matrix(L) -> np.ndarray:
    """Coerce a scalar, vector or nested list into a 2-D float64 array.

    A scalar becomes a 1x1 matrix and a flat vector becomes a single row.
    """
    arr = np.asarray(L, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise DomainError(f"matrix must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise DomainError("empty matrix")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix has non-finite entries")
    return arr


@dataclass
class LatticeBasis:
    matrix: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise DomainError(f"basis must be square, got shape {self.matrix.shape}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def det(self) -> float:
        return abs(float(np.linalg.det(self.matrix)))


def assemble_lattice(L, orientation: str = "upper") -> LatticeBasis:
    """Basis of the lattice generated by a linear form.

    ``upper``: columns of [[I_m, L], [0, I_n]] for L of shape (m, n).
    ``dual``: the same construction applied to the transpose, so a row vector
    a (shape 1 x n) yields columns of [[I_n, a^t], [0, 1]].
    """
    L = as_matrix(L)
    if orientation == "dual":
        L = L.T
    elif orientation != "upper":
        raise DomainError(f"unknown orientation {orientation!r}")
    m, n = L.shape
    A = np.eye(m + n)
    A[:m, m:] = L
    return LatticeBasis(A, {"orientation": orientation, "m": m, "n": n})


# ---------------------------------------------------------------- reduction


def gram_schmidt(B: np.ndarray):
    """Return (mu, bstar_sq) for the columns of B."""
    d = B.shape[1]
    bstar = np.zeros_like(B)
    mu = np.zeros((d, d))
    bsq = np.zeros(d)
    for i in range(d):
        v = B[:, i].copy()
        for j in range(i):
            mu[i, j] = B[:, i] @ bstar[:, j] / bsq[j]
            v -= mu[i, j] * bstar[:, j]
        bstar[:, i] = v
        bsq[i] = v @ v
        if bsq[i] <= 0.0:
            raise DomainError("basis vectors are linearly dependent")
    return mu, bsq


def lll_reduce(B: np.ndarray, delta: float = LOVASZ_DELTA):
    """LLL-reduce the columns of B.  Returns (reduced, U) with reduced = B @ U."""
    B0 = np.asarray(B, dtype=np.float64)
    d = B0.shape[1]
    U = np.eye(d, dtype=object)
    cur = B0.copy()
    mu, bsq = gram_schmidt(cur)
    k = 1
    guard = 0
    while k < d:
        guard += 1
        if guard > 100000:
            raise InternalError("LLL did not terminate")
        for j in range(k - 1, -1, -1):
            r = round(mu[k, j])
            if r:
                U[:, k] = U[:, k] - r * U[:, j]
                cur = B0 @ U.astype(np.float64)
                mu, bsq = gram_schmidt(cur)
        if bsq[k] >= (delta - mu[k, k - 1] ** 2) * bsq[k - 1]:
            k += 1
        else:
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            cur = B0 @ U.astype(np.float64)
            mu, bsq = gram_schmidt(cur)
            k = max(k - 1, 1)
    return cur, U


def _enumerate_ball(B: np.ndarray, radius: float) -> list:
    """All nonzero integer x (up to sign) with |B x| <= radius, by Fincke-Pohst."""
    d = B.shape[1]
    mu, bsq = gram_schmidt(B)
    r2 = radius * radius * (1 + 4 * RADIUS_SLACK)
    out = []
    x = [0] * d

    def rec(i, partial):
        center = -sum(mu[j, i] * x[j] for j in range(i + 1, d))
        rem = r2 - partial
        if rem < 0:
            return
        w = math.sqrt(rem / bsq[i])
        lo = math.ceil(center - w - 1e-9)
        hi = math.floor(center + w + 1e-9)
        for xi in range(lo, hi + 1):
            x[i] = xi
            p = partial + bsq[i] * (xi - center) ** 2
            if p <= r2:
                if i == 0:
                    out.append(tuple(x))
                else:
                    rec(i - 1, p)
        x[i] = 0

    rec(d - 1, 0.0)
    keep = []
    for v in out:
        nz = [c for c in v if c != 0]
        if nz and nz[-1] > 0:
            keep.append(v)
    return keep


class _ExactRank:
    """Incremental rank of integer vectors over the rationals."""

    def __init__(self, d):
        self.rows = {}  # pivot index -> reduced row (Fractions)
        self.d = d

    def try_add(self, v) -> bool:
        w = [Fraction(int(c)) for c in v]
        for p, row in self.rows.items():
            if w[p] != 0:
                f = w[p] / row[p]
                w = [a - f * b for a, b in zip(w, row)]
        for i, c in enumerate(w):
            if c != 0:
                self.rows[i] = w
                return True
        return False

    @property
    def rank(self):
        return len(self.rows)


@dataclass
class MinimaProfile:
    """Successive minima with realizing vectors.

    ``coefficients[:, s]`` expresses the s-th realizer in the input basis.
    """

    minima: tuple
    realizers: np.ndarray
    coefficients: np.ndarray
    basis: LatticeBasis
    radius: float = 0.0

    @property
    def dim(self):
        return len(self.minima)

    def minkowski_ratio(self) -> float:
        return float(np.prod(self.minima)) / self.basis.det


def exact_successive_minima(basis: LatticeBasis) -> MinimaProfile:
    """Successive minima for the Euclidean norm by reduction plus enumeration."""
    d = basis.dim
    if d > MAX_EXACT_DIM:
        raise CapabilityError(f"exact minima limited to dimension {MAX_EXACT_DIM}, got {d}")
    if basis.det == 0.0:
        raise DomainError("basis is singular")
    B0 = basis.matrix
    red, U = lll_reduce(B0)
    lengths = np.linalg.norm(red, axis=0)
    safe = float(lengths.max())
    radius = min(d * float(lengths.min()), safe)
    attempts = 0
    while True:
        found = _greedy_minima(B0, red, U, radius)
        if found is not None:
            mins, coeffs = found
            break
        attempts += 1
        if radius >= safe:
            raise InternalError("enumeration at the reduced-basis radius missed a basis")
        radius = min(2 * radius, safe) if attempts < MAX_RADIUS_DOUBLINGS else safe
    realizers = B0 @ coeffs.astype(np.float64)
    return MinimaProfile(tuple(mins), realizers, coeffs, basis, radius)


def _greedy_minima(B0, red, U, radius):
    d = B0.shape[1]
    cands = _enumerate_ball(red, radius * (1 + RADIUS_SLACK))
    if not cands:
        return None
    X = np.array(cands, dtype=object).T  # coefficients in reduced basis
    Z = U.dot(X)  # coefficients in input basis (exact ints)
    vecs = B0 @ Z.astype(np.float64)
    norms = np.linalg.norm(vecs, axis=0)
    order = sorted(range(len(cands)), key=lambda i: (norms[i], tuple(int(c) for c in Z[:, i])))
    rank = _ExactRank(d)
    mins, cols = [], []
    for i in order:
        if norms[i] > radius * (1 + RADIUS_SLACK):
            break
        if rank.try_add(Z[:, i]):
            mins.append(float(norms[i]))
            cols.append([int(c) for c in Z[:, i]])
            if rank.rank == d:
                return mins, np.array(cols, dtype=object).T
    return None


# ------------------------------------------------------- exact integer algebra


def int_det(M) -> int:
    """Exact determinant of an integer matrix (Bareiss)."""
    A = [[int(c) for c in row] for row in np.asarray(M, dtype=object)]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def int_adjugate(M) -> list:
    """Exact adjugate of a nonsingular integer matrix."""
    A = [[Fraction(int(c)) for c in row] for row in np.asarray(M, dtype=object)]
    n = len(A)
    det = int_det(M)
    if det == 0:
        raise DomainError("singular integer matrix")
    aug = [row + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        p = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [v / piv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    inv = [row[n:] for row in aug]
    adj = [[inv[i][j] * det for j in range(n)] for i in range(n)]
    for row in adj:
        for v in row:
            if v.denominator != 1:
                raise InternalError("adjugate is not integral")
    return [[int(v) for v in row] for row in adj]


def _egcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _triangular_completion(C):
    """Unimodular U whose columns span the lattice and are triangular w.r.t. C.

    Column s of U lies in the rational span of the first s+1 columns of C.
    Off-diagonal coordinates are size-reduced to at most 1/2 in absolute value.
    """
    d = len(C)
    A = int_adjugate(C)
    U = [[int(i == j) for j in range(d)] for i in range(d)]

    def colop(i, j, a, b, c, e):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + e col_j)
        for M in (A, U):
            for r in range(d):
                ci, cj = M[r][i], M[r][j]
                M[r][i] = a * ci + b * cj
                M[r][j] = c * ci + e * cj

    for i in range(d - 1, -1, -1):
        for j in range(i):
            if A[i][j] == 0:
                continue
            g, x, y = _egcd(A[i][i], A[i][j])
            ai, aj = A[i][i] // g, A[i][j] // g
            colop(i, j, x, y, -aj, ai)
        if A[i][i] < 0:
            for M in (A, U):
                for r in range(d):
                    M[r][i] = -M[r][i]
    for s in range(d):
        for j in range(s - 1, -1, -1):
            r = round(Fraction(A[j][s], A[j][j]))
            if r:
                for M in (A, U):
                    for row in range(d):
                        M[row][s] -= r * M[row][j]
    return U


@dataclass
class MonotoneBasis:
    """Basis with nested supports; coefficients are relative to the input basis."""

    vectors: np.ndarray
    coefficients: np.ndarray
    shifts: tuple
    supports: tuple
    completed: bool


def workable_basis(profile: MinimaProfile):
    """The realizers when they form a basis, otherwise a triangular completion.

    Returns (coefficients, completed_flag).  The completion keeps the s-th vector
    inside the span of the first s realizers with length at most
    max(1, s/2) times the s-th minimum.
    """
    C = [[int(c) for c in row] for row in profile.coefficients]
    det = int_det(C)
    if abs(det) == 1:
        return np.array(C, dtype=object), False
    Uc = _triangular_completion(C)
    return np.array(Uc, dtype=object), True


def supports_of(B0: np.ndarray, Z) -> list:
    """Supports of the columns of B0 @ Z, ignoring float round-off."""
    Zf = np.asarray(Z, dtype=np.float64)
    vals = B0 @ Zf
    scale = np.abs(B0) @ np.abs(Zf)
    nz = np.abs(vals) > _SUPPORT_REL_TOL * scale
    return [frozenset(np.flatnonzero(nz[:, s]).tolist()) for s in range(Zf.shape[1])]


def support_monotone_transform(basis_matrix, coefficients=None, completed=False) -> MonotoneBasis:
    """Make supports nested by adding small multiples of the previous vector.

    The s-th output vector is v_s + c_s * w_{s-1}, where c_s is the least
    non-negative integer such that supp(w_{s-1}) is inside supp(w_s).
    """
    B0 = np.asarray(basis_matrix, dtype=np.float64)
    d = B0.shape[1]
    if coefficients is None:
        coefficients = np.eye(d, dtype=np.int64).astype(object)
    Z = np.array(coefficients, dtype=object)
    out = Z.copy()
    shifts = [0]
    for s in range(1, d):
        prev_supp = supports_of(B0, out[:, [s - 1]])[0]
        for c in range(d + 1):
            cand = Z[:, s] + c * out[:, s - 1]
            if prev_supp <= supports_of(B0, cand.reshape(-1, 1))[0]:
                out[:, s] = cand
                shifts.append(c)
                break
        else:
            raise InternalError(f"no shift within {d + 1} candidates for vector {s}")
    vectors = B0 @ out.astype(np.float64)
    return MonotoneBasis(vectors, out, tuple(shifts), tuple(supports_of(B0, out)), completed)


def support_monotone_basis(profile: MinimaProfile) -> MonotoneBasis:
    Z, completed = workable_basis(profile)
    return support_monotone_transform(profile.basis.matrix, Z, completed)


@dataclass
class TriangularPermutation:
    """``order[k]`` is the old coordinate placed at new position k."""

    order: tuple
    supports: tuple

    def apply(self, v):
        return np.asarray(v)[list(self.order)]


def support_triangular_permutation(vectors=None, m: int = 1, supports: Optional[Sequence] = None,
                                   dim: Optional[int] = None) -> TriangularPermutation:
    """Relabel the trailing coordinates so every support becomes a prefix.

    Requires nested supports that all contain the first m coordinates.
    """
    if supports is None:
        V = np.asarray(vectors, dtype=np.float64)
        dim = V.shape[0]
        supports = [frozenset(np.flatnonzero(np.abs(V[:, s]) > 0).tolist()) for s in range(V.shape[1])]
    else:
        supports = [frozenset(s) for s in supports]
        if dim is None:
            dim = max(max(s) for s in supports if s) + 1
    head = frozenset(range(m))
    prev = frozenset()
    for s, supp in enumerate(supports):
        if not head <= supp:
            raise DomainError(f"vector {s} support misses one of the first {m} coordinates")
        if not prev <= supp:
            raise DomainError(f"vector {s} support does not contain the previous support")
        prev = supp
    order = list(range(m))
    seen = set(head)
    for supp in supports:
        for c in sorted(supp - seen):
            order.append(c)
            seen.add(c)
    order.extend(c for c in range(dim) if c not in seen)
    new_pos = {old: new for new, old in enumerate(order)}
    new_supports = tuple(frozenset(new_pos[c] for c in supp) for supp in supports)
    for s, supp in enumerate(new_supports):
        if supp != frozenset(range(len(supp))):
            raise InternalError(f"permuted support of vector {s} is not a prefix")
    return TriangularPermutation(tuple(order), new_supports)


def davenport_rhs(Q: float, minima: Sequence[float]) -> float:
    """1 + sum_s Q^s / (minima_1 * ... * minima_s)."""
    if Q < 0:
        raise DomainError("Q must be non-negative")
    total, prod = 1.0, 1.0
    for s, delta in enumerate(minima, start=1):
        prod *= delta
        total += Q ** s / prod
    return total


def count_box_points(basis: LatticeBasis, Q: float, budget: float = 5e7) -> int:
    """Number of lattice points in the cube [-Q, Q]^d (sup norm), zero included."""
    red, _ = lll_reduce(basis.matrix)
    inv = np.linalg.inv(red)
    bounds = np.floor(Q * np.abs(inv).sum(axis=1) + 1e-9).astype(np.int64)
    size = float(np.prod(2 * bounds + 1))
    if size > budget:
        raise CapabilityError(f"coefficient box of size {size:.3g} exceeds budget")
    d = red.shape[1]
    tol = 1e-9 * max(1.0, Q)
    grids = [np.arange(-b, b + 1) for b in bounds[1:]]
    rest = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, d - 1) if d > 1 else np.zeros((1, 0))
    total = 0
    for z0 in range(-bounds[0], bounds[0] + 1):
        Zc = np.hstack([np.full((rest.shape[0], 1), z0), rest])
        pts = Zc @ red.T
        total += int(np.count_nonzero(np.all(np.abs(pts) <= Q + tol, axis=1)))
    return total
