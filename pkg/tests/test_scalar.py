import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from starcount.errors import DomainError
from starcount.scalar import (Scalar, clamp_plus, clamped_log, geo_mean, near, nearest_int_distance,
                              nearest_int_distance_array)


@pytest.mark.parametrize("x, want", [(0.5, 0.5), (1.25, 0.25), (-2.7, 0.3), (3.0, 0.0)])
def test_nearest_int_distance_examples(x, want):
    assert nearest_int_distance(x) == pytest.approx(want, abs=1e-15)


def test_midpoint_is_exactly_half():
    assert nearest_int_distance(2.5) == 0.5
    assert nearest_int_distance(Fraction(7, 2)) == Fraction(1, 2)


def test_fraction_input_stays_exact():
    assert nearest_int_distance(Fraction(-27, 10)) == Fraction(3, 10)


@pytest.mark.parametrize("x, want", [(0.5, 1), (3, 3), (1, 1), (-4, 1)])
def test_clamp_plus(x, want):
    assert clamp_plus(x) == want


@pytest.mark.parametrize("x, want", [(1, 1.0), (math.e ** 2, 2.0), (0, 1.0)])
def test_clamped_log(x, want):
    assert clamped_log(x) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize("T, want", [((2, 8), 4.0), ((5,), 5.0), ((1, 1, 1), 1.0)])
def test_geo_mean(T, want):
    assert geo_mean(T) == pytest.approx(want, rel=1e-15)


def test_geo_mean_rejects_small_sides():
    with pytest.raises(DomainError):
        geo_mean([0.5, 2])


def test_scalar_modes():
    s = Scalar.exact(Fraction(6, -4))
    assert s.value == Fraction(-3, 2) and s.value.denominator > 0 and s.mode == "exact"
    assert Scalar.approx(0.1).mode == "float"


def test_near_uses_margin():
    assert near(0.2, 0.2 + 5e-13)
    assert not near(0.2, 0.2 + 1e-9)


def test_array_distance_matches_scalar():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1e3, 1e3, 10 ** 6)
    d = nearest_int_distance_array(x)
    assert d.min() >= 0 and d.max() <= 0.5
    k = rng.integers(-1000, 1000, x.size)
    assert np.max(np.abs(d - nearest_int_distance_array(x + k))) <= 1e-9
    for v in x[:200]:
        assert nearest_int_distance(float(v)) == pytest.approx(
            float(min(Fraction(v) % 1, 1 - Fraction(v) % 1)), abs=1e-15)


@given(st.floats(-1e3, 1e3), st.integers(-10 ** 3, 10 ** 3))
def test_distance_is_periodic(x, k):
    d = nearest_int_distance(x)
    assert 0 <= d <= 0.5
    assert abs(d - nearest_int_distance(x + k)) <= 1e-9


@given(st.fractions(min_value=-100, max_value=100, max_denominator=10 ** 4))
def test_exact_and_float_agree(x):
    assert abs(float(nearest_int_distance(x)) - nearest_int_distance(float(x))) <= 1e-10


@given(st.lists(st.floats(1, 1e3), min_size=1, max_size=5), st.floats(1, 1e3))
def test_geo_mean_scale_covariant(T, c):
    assert geo_mean([c * t for t in T]) == pytest.approx(c * geo_mean(T), rel=1e-12)
