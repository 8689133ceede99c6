import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import coefficient_box, naive_minima
from starcount.errors import CapabilityError, DomainError
from starcount.lattice import (LatticeBasis, assemble_lattice, count_box_points, davenport_rhs,
                               exact_successive_minima, int_det, lll_reduce, support_monotone_basis,
                               support_monotone_transform, support_triangular_permutation)

GOLDEN = 1.6180339887


def test_assemble_upper_and_dual():
    up = assemble_lattice([[GOLDEN]], "upper")
    assert np.allclose(up.matrix, [[1, GOLDEN], [0, 1]])
    dual = assemble_lattice([[GOLDEN]], "dual")
    assert dual.det == pytest.approx(1.0, abs=1e-12)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_assembled_lattice_is_unimodular(m, n, seed):
    L = np.random.default_rng(seed).uniform(-3, 3, (m, n))
    for orient in ("upper", "dual"):
        assert assemble_lattice(L, orient).det == pytest.approx(1.0, abs=1e-9)


def test_minima_examples():
    assert exact_successive_minima(LatticeBasis(np.eye(2))).minima == pytest.approx((1, 1))
    assert exact_successive_minima(LatticeBasis(np.diag([2, 0.5]))).minima == pytest.approx((0.5, 2))
    prof = exact_successive_minima(assemble_lattice([[GOLDEN]]))
    assert prof.minima[0] == pytest.approx(1.0, abs=1e-12)
    assert prof.minima[1] == pytest.approx(math.hypot(1, 2 - GOLDEN), abs=1e-9)
    assert np.allclose(np.abs(prof.realizers[:, 0]), [1, 0])


def test_golden_minima_match_enumeration_over_50_box():
    B = assemble_lattice([[GOLDEN]]).matrix
    assert naive_minima(B, 50) == pytest.approx(exact_successive_minima(LatticeBasis(B)).minima, abs=1e-12)


def test_minima_dimension_limit():
    with pytest.raises(CapabilityError):
        exact_successive_minima(LatticeBasis(np.eye(9)))


def test_non_square_basis_rejected():
    with pytest.raises(DomainError):
        LatticeBasis(np.ones((2, 3)))


def test_lll_keeps_lattice():
    rng = np.random.default_rng(3)
    B = rng.uniform(-5, 5, (4, 4))
    red, U = lll_reduce(B)
    assert abs(int_det([[int(x) for x in row] for row in U])) == 1
    assert np.allclose(B @ U.astype(float), red)


@pytest.mark.parametrize("basis, want, shift", [
    ([[1, 0], [0, 1]], [[1, 1], [0, 1]], 1),
    ([[1, 1], [1, 0]], [[1, 2], [1, 1]], 1),
    ([[1, 2], [0, 1]], [[1, 2], [0, 1]], 0),
])
def test_support_monotone_examples(basis, want, shift):
    out = support_monotone_transform(np.array(basis, dtype=float))
    assert np.allclose(out.vectors, want)
    assert out.shifts[1] == shift


def test_triangular_permutation_examples():
    perm = support_triangular_permutation(supports=[{0, 2}, {0, 2, 1}], m=1, dim=3)
    assert perm.order == (0, 2, 1)
    assert perm.supports == (frozenset({0, 1}), frozenset({0, 1, 2}))
    assert support_triangular_permutation(supports=[{0, 1}, {0, 1, 2}], m=1, dim=3).order == (0, 1, 2)


def test_triangular_permutation_names_failing_vector():
    with pytest.raises(DomainError, match="vector 1"):
        support_triangular_permutation(supports=[{0, 1}, {0, 2}], m=1, dim=3)


@pytest.mark.parametrize("Q, minima, want", [(3, (1, 1), 13), (3, (0.5, 2), 16), (5, (1,), 6)])
def test_davenport_examples(Q, minima, want):
    assert davenport_rhs(Q, minima) == pytest.approx(want)


def test_incomplete_realizers_get_completed():
    # Index-2 sublattice style example where the minima realizers do not form a basis.
    B = np.eye(5)
    B[:, 4] = 0.5
    prof = exact_successive_minima(LatticeBasis(B))
    mono = support_monotone_basis(prof)
    C = [[int(x) for x in row] for row in mono.coefficients]
    assert abs(int_det(C)) == 1
    assert mono.completed


def _random_basis(rng, d):
    while True:
        B = rng.uniform(-5, 5, (d, d))
        if abs(np.linalg.det(B)) > 0.5 and coefficient_box(B) <= {2: 30, 3: 20, 4: 10}[d]:
            return B


@pytest.mark.parametrize("seed", range(20))
def test_minima_agree_with_naive_oracle(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 3
    B = _random_basis(rng, d)
    prof = exact_successive_minima(LatticeBasis(B))
    assert naive_minima(B, coefficient_box(B)) == pytest.approx(prof.minima, abs=1e-9)
    assert 2.0 ** -d <= prof.minkowski_ratio() <= 2.0 ** d


@given(st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_monotone_basis_is_unimodular_and_nested(d, seed):
    B = np.random.default_rng(seed).uniform(-5, 5, (d, d))
    if abs(np.linalg.det(B)) < 0.5:
        return
    mono = support_monotone_basis(exact_successive_minima(LatticeBasis(B)))
    assert abs(int_det([[int(x) for x in row] for row in mono.coefficients])) == 1
    assert all(a <= b for a, b in zip(mono.supports, mono.supports[1:]))
    assert all(0 <= c <= d for c in mono.shifts)


def _ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@pytest.mark.parametrize("seed", range(6))
def test_box_count_within_davenport(seed):
    # The cube has 2^d times the volume of the Euclidean ball the minima are
    # measured in, so the honest ceiling is 2^d * (2^d / vol B_d), not a flat 8.
    rng = np.random.default_rng(100 + seed)
    d = 2 + seed % 3
    B = _random_basis(rng, d)
    basis = LatticeBasis(B)
    minima = exact_successive_minima(basis).minima
    ceiling = 4.0 ** d / _ball_volume(d)
    for Q in (1, 5, 10 if d < 4 else 6):
        assert count_box_points(basis, Q) <= ceiling * davenport_rhs(Q, minima)


def test_box_count_of_integer_lattice():
    assert count_box_points(LatticeBasis(np.eye(2)), 2) == 25
