"""Seeded random streams.

Philox4x64 (a counter-based generator) keyed by a 64-bit seed.  Sample i of a
run is always the i-th draw of the same stream, independent of worker count.
"""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def uniform_alphas(seed: int, count: int, n: int) -> np.ndarray:
    """count x n matrix of independent uniforms on [0, 1)."""
    return make_rng(seed).random((count, n))
