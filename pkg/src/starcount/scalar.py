"""Scalar primitives: distance to the nearest integer, clamped logs, geometric means.

Every function accepts either a float or a ``fractions.Fraction``.  Fractions
are handled exactly; floats use IEEE-754 double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import DomainError

Number = Union[int, float, Fraction]

# Comparisons against thresholds closer than this are flagged as boundary sensitive.
COMPARE_MARGIN = 1e-12
# Summands whose nearest-integer distance falls below this are singular.
SINGULAR_DISTANCE = 1e-15


@dataclass(frozen=True)
class Scalar:
    """A value tagged with its arithmetic mode ("float" or "exact")."""

    value: Union[float, Fraction]

    @classmethod
    def exact(cls, x: Number) -> "Scalar":
        if isinstance(x, float) and not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        return cls(Fraction(x))

    @classmethod
    def approx(cls, x: Number) -> "Scalar":
        return cls(_finite(float(x)))

    @property
    def mode(self) -> str:
        return "exact" if isinstance(self.value, Fraction) else "float"

    def __float__(self) -> float:
        return float(self.value)


def _finite(x):
    if isinstance(x, Fraction) or isinstance(x, int):
        return x
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite value {x!r}")
    return x


def nearest_int_distance(x: Number) -> Number:
    """Distance from x to the nearest integer, in [0, 1/2].

    Half-integers return exactly 1/2.  Fractions stay exact.
    """
    x = _finite(x)
    if isinstance(x, (Fraction, int)):
        r = Fraction(x) % 1
        return min(r, 1 - r)
    r = x - math.floor(x)
    return min(r, 1.0 - r)


def nearest_int_distance_array(x) -> np.ndarray:
    """Vectorised float version of :func:`nearest_int_distance`."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite value in array")
    r = x - np.floor(x)
    return np.minimum(r, 1.0 - r)


def clamp_plus(x: Number) -> Number:
    """max{1, x}."""
    x = _finite(x)
    return x if x > 1 else type(x)(1)


def clamped_log(x: Number) -> float:
    """log max{x, e}; always at least 1."""
    x = _finite(x)
    if x <= math.e:
        return 1.0
    return math.log(x)


def clamped_log_array(x) -> np.ndarray:
    return np.log(np.maximum(np.asarray(x, dtype=np.float64), math.e))


def geo_mean(values: Iterable[Number]) -> float:
    """Geometric mean of box sides, each at least 1."""
    vals = [float(_finite(v)) for v in values]
    if not vals:
        raise DomainError("geometric mean of an empty tuple")
    if any(v < 1 for v in vals):
        raise DomainError("geometric mean needs entries >= 1")
    return math.exp(math.fsum(math.log(v) for v in vals) / len(vals))


def near(a: float, b: float, margin: float = COMPARE_MARGIN) -> bool:
    """True when a comparison between a and b is boundary sensitive."""
    return abs(float(a) - float(b)) <= margin
