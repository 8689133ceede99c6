import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from starcount.certify import PhiSpec, certify_phi, estimate_c_alpha, min_weighted_product
from starcount.errors import DomainError

GOLDEN = 1.6180339887


def test_golden_certified_with_const_03():
    rep = certify_phi([[GOLDEN]], PhiSpec("const", 0.3), 10 ** 4)
    assert rep.holds and rep.worst_q == (1,)
    assert rep.worst_ratio == pytest.approx(0.381966 / 0.3, abs=1e-5)
    assert rep.scope == "certified up to Qmax=10000"


def test_golden_fails_with_const_04():
    rep = certify_phi([[GOLDEN]], PhiSpec("const", 0.4), 10 ** 4)
    assert not rep.holds and rep.worst_q == (1,)
    assert rep.scope.startswith("fails within")


def test_rational_fails_at_two():
    rep = certify_phi([[0.5]], PhiSpec("const", 0.1), 5)
    assert not rep.holds and rep.worst_q == (2,) and rep.worst_ratio == 0.0


def test_phi_validation():
    with pytest.raises(DomainError):
        PhiSpec("const", 0.0)
    with pytest.raises(DomainError):
        PhiSpec("cubic", 0.5)
    assert PhiSpec("log", 0.5, 1.0)(math.e ** 3) == pytest.approx(0.5 / 3)


def test_c_alpha_examples():
    est = estimate_c_alpha([GOLDEN], 0.1, 100)
    assert est.value == pytest.approx(0.381966, abs=1e-6) and est.witness == (1,)
    assert estimate_c_alpha([0.5], 0.1, 10).value == 0.0
    assert estimate_c_alpha([GOLDEN], 0.1, 1).value == pytest.approx(float(oracles.dist(oracles.exact_form([GOLDEN], [1]))))


def test_min_weighted_product_against_scan():
    L = np.array([[0.7548776662, 0.5698402910]])
    want = min(max(1, abs(a)) * max(1, abs(b)) * float(oracles.dist(oracles.exact_form(L[0], (a, b))))
               for a in range(-12, 13) for b in range(-12, 13) if (a, b) != (0, 0))
    assert min_weighted_product(L, 12)[0] == pytest.approx(want, rel=1e-12)


def test_log_family_two_dims():
    L = np.array([[0.7548776662, 0.5698402910]])
    phi = PhiSpec("log", 0.01, 1.0)
    want = math.inf
    for a in range(-30, 31):
        for b in range(-30, 31):
            if (a, b) == (0, 0):
                continue
            w = max(1, abs(a)) * max(1, abs(b))
            lhs = w * float(oracles.dist(oracles.exact_form(L[0], (a, b))))
            want = min(want, lhs / phi(math.sqrt(w)))
    rep = certify_phi(L, phi, 30)
    assert rep.worst_ratio == pytest.approx(want, rel=1e-9)
    assert rep.holds == (want >= 1)


@settings(max_examples=20)
@given(st.floats(0.01, 0.99), st.integers(1, 200), st.integers(1, 200))
def test_c_alpha_nonincreasing_in_range(a, q1, q2):
    lo, hi = sorted((q1, q2))
    assert estimate_c_alpha([a], 0.1, hi).value <= estimate_c_alpha([a], 0.1, lo).value


@settings(max_examples=20)
@given(st.floats(0.01, 0.99), st.floats(0.001, 1.0))
def test_certificate_consistent_with_minimum(a, c):
    val, _ = min_weighted_product([[a]], 300)
    assert certify_phi([[a]], PhiSpec("const", c), 300).holds == (c <= val)


def test_c_alpha_positive_for_random_pairs():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = rng.uniform(0, 1, 2)
        assert estimate_c_alpha(a, 0.5, 1000, mode="dual").value > 0
