"""Finite-range certificates of multiplicative bad approximability.

A matrix L is phi-badly approximable when
    q_1^+ ... q_n^+ * prod_i ||L_i q|| >= phi((q_1^+ ... q_n^+)^(1/n))
for all q != 0, with x^+ = max(1, |x|).  Only a finite box can be scanned, so a
positive answer means "certified up to Qmax" and nothing more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .counting import _blocks, _check_budget, run_blocks
from .errors import CapabilityError, DomainError
from .lattice import as_matrix
from .scalar import clamped_log


@dataclass(frozen=True)
class PhiSpec:
    """phi(x) = c * log max(x, e)^(-p); non-increasing, values in (0, 1]."""

    family: str = "const"
    c: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        if self.family not in ("const", "log"):
            raise DomainError(f"unknown phi family {self.family!r}")
        if not 0 < self.c <= 1 or self.p < 0:
            raise DomainError("need 0 < c <= 1 and p >= 0")

    def __call__(self, x: float) -> float:
        if self.family == "const":
            return self.c
        return self.c * clamped_log(x) ** (-self.p)


@dataclass
class CertReport:
    holds: bool
    worst_q: tuple
    worst_ratio: float
    qmax: int
    scope: str = ""

    def __post_init__(self):
        self.scope = f"certified up to Qmax={self.qmax}" if self.holds else f"fails within Qmax={self.qmax}"


def _scan_min(L, qmax: int, power: float, symmetric: bool, lower: int = None, workers: int = 1):
    L = np.ascontiguousarray(as_matrix(L))
    n = L.shape[1]
    hi = np.full(n, int(qmax), dtype=np.int64)
    lo = np.full(n, -int(qmax) if lower is None else int(lower), dtype=np.int64)
    _check_budget(lo, hi)

    def fn(a, b):
        q = np.zeros(n, dtype=np.int64)
        val = kernels.min_scan_block(L, lo, hi, a, b, float(power), bool(symmetric), q)
        return val, tuple(int(v) for v in q)

    lead_lo = 0 if symmetric else int(lo[0])
    parts = run_blocks(fn, _blocks(lead_lo, int(hi[0])), workers)
    best = min(parts, key=lambda p: p[0])
    return best[0], best[1]


def min_weighted_product(L, qmax: int, workers: int = 1):
    """min over 0 < max|q_j| <= Qmax of q_1^+ ... q_n^+ prod_i ||L_i q||, with argmin."""
    return _scan_min(L, qmax, 0.0, True, workers=workers)


def certify_phi(L, phi: PhiSpec, qmax: int, workers: int = 1) -> CertReport:
    """Check the phi inequality on every q in [-Qmax, Qmax]^n minus 0.

    For a constant phi this is one minimum scan.  For the logarithmic family with
    n = 1 the ratio lhs / phi is itself a weighted minimum with exponent p; for
    n > 1 it is not, and a direct (capped) scan is used instead.
    """
    if qmax < 1:
        raise DomainError("Qmax must be at least 1")
    L = as_matrix(L)
    n = L.shape[1]
    if phi.family == "const" or phi.p == 0:
        val, q = _scan_min(L, qmax, 0.0, True, workers=workers)
        ratio = val / phi.c
    elif n == 1:
        val, q = _scan_min(L, qmax, phi.p, True, workers=workers)
        ratio = val / phi.c
    else:
        ratio, q = _log_phi_scan(L, phi, qmax)
    return CertReport(bool(ratio >= 1.0), q, float(ratio), int(qmax))


def _log_phi_scan(L, phi, qmax):
    # clog of a geometric mean is not a power of clog of the product, so scan in numpy.
    n = L.shape[1]
    if (2 * qmax + 1) ** n > 2e6:
        raise CapabilityError("logarithmic phi scan limited to 2e6 points when n > 1")
    grids = np.meshgrid(*[np.arange(-qmax, qmax + 1)] * n, indexing="ij")
    Q = np.stack([g.ravel() for g in grids], axis=1)
    first = np.array([row[np.flatnonzero(row)[0]] if row.any() else 0 for row in Q])
    Q = Q[first > 0]
    W = np.prod(np.maximum(np.abs(Q), 1), axis=1).astype(float)
    D = W.copy()
    for i in range(L.shape[0]):
        D *= np.array([abs(kernels.form_fraction(L[i], q)) for q in Q])
    gm = W ** (1.0 / n)
    phis = phi.c * np.log(np.maximum(gm, math.e)) ** (-phi.p)
    r = D / phis
    k = int(np.argmin(r))
    return float(r[k]), tuple(int(v) for v in Q[k])


@dataclass
class CAlphaEstimate:
    value: float
    witness: tuple
    qmax: int


def estimate_c_alpha(alpha, epsilon0: float = 0.1, qmax: int = 100, mode: str = "joint",
                     workers: int = 1) -> CAlphaEstimate:
    """Finite-range estimate of c(alpha).

    joint: min over q in [-Qmax, Qmax]^n minus 0 of
        q_1^+ ... q_n^+ ||q . alpha|| * clog(q_1^+ ... q_n^+)^(n + eps0)
    dual: min over 1 <= q <= Qmax of q prod_i ||q alpha_i|| * clog(q)^(n + eps0).
    """
    a = np.atleast_1d(np.asarray(alpha, dtype=float)).ravel()
    n = a.size
    if mode == "joint":
        val, q = _scan_min(a.reshape(1, -1), qmax, n + epsilon0, True, workers=workers)
    elif mode == "dual":
        val, q = _scan_min(a.reshape(-1, 1), qmax, n + epsilon0, False, lower=1, workers=workers)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    return CAlphaEstimate(float(val), q, int(qmax))
