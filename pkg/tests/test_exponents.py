import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavelife.exponents import (
    CaseTag,
    LawKind,
    a_residual,
    gamma,
    key_exponent_identity,
    predicted_lifespan_law,
    solve_a,
    strauss_exponent,
    strauss_exponent_bisect,
)


@pytest.mark.parametrize("n,p,expected", [(3, 2.0, 1.0), (1, 2.0, 3.0)])
def test_gamma_direct_values(n, p, expected):
    assert gamma(n, p) == pytest.approx(expected, abs=1e-15)


def test_critical_power_closed_forms():
    assert strauss_exponent(3) == pytest.approx(1 + math.sqrt(2), abs=1e-12)
    assert strauss_exponent(2) == pytest.approx((3 + math.sqrt(17)) / 2, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 11))
def test_critical_power_matches_bisection_oracle(n):
    assert strauss_exponent(n) == pytest.approx(strauss_exponent_bisect(n), abs=1e-12)


@pytest.mark.parametrize("n", range(2, 11))
def test_gamma_vanishes_at_critical_power(n):
    assert abs(gamma(n, strauss_exponent(n))) < 1e-12


def test_critical_power_decreasing():
    values = [strauss_exponent(n) for n in range(2, 11)]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("n", [2, 3])
def test_key_identity(n):
    assert key_exponent_identity(n, strauss_exponent(n)) == pytest.approx(1.0, abs=1e-12)


def test_critical_power_rejects_line():
    with pytest.raises(ValueError):
        strauss_exponent(1)


def test_law_table():
    law = predicted_lifespan_law(1, 2.0, False)
    assert law.kind is LawKind.POWER and law.exponent == pytest.approx(0.5)
    assert predicted_lifespan_law(1, 2.0, True).exponent == pytest.approx(2 / 3)
    for zero in (False, True):
        law = predicted_lifespan_law(3, 2.0, zero)
        assert law.kind is LawKind.POWER and law.exponent == pytest.approx(2.0)
        crit = predicted_lifespan_law(3, 1 + math.sqrt(2), zero)
        assert crit.kind is LawKind.EXPONENTIAL
        assert crit.rate_exponent == pytest.approx(2 + math.sqrt(2), abs=1e-12)
    assert predicted_lifespan_law(2, 2.0, False).kind is LawKind.TWO_DIM_P2
    assert predicted_lifespan_law(2, 2.0, True).exponent == pytest.approx(1.0)
    assert predicted_lifespan_law(2, 1.5, False).exponent == pytest.approx(0.5 / 1.5)


def test_law_rejects_supercritical():
    with pytest.raises(ValueError):
        predicted_lifespan_law(3, 3.0, False)


def test_case_tags_distinct():
    tags = {
        predicted_lifespan_law(1, 2.0, False).case_tag,
        predicted_lifespan_law(1, 2.0, True).case_tag,
        predicted_lifespan_law(2, 1.5, False).case_tag,
        predicted_lifespan_law(2, 2.0, False).case_tag,
        predicted_lifespan_law(3, 2.0, False).case_tag,
        predicted_lifespan_law(3, strauss_exponent(3), False).case_tag,
    }
    assert len(tags) == 6
    assert all(isinstance(t, CaseTag) for t in tags)


@given(st.floats(min_value=1.0001, max_value=50.0))
def test_line_ordering(p):
    assert (p - 1) / 2 < p * (p - 1) / (p + 1)


@given(st.floats(min_value=1.0001, max_value=1.9999))
def test_plane_ordering(p):
    assert (p - 1) / (3 - p) < p * (p - 1) / gamma(2, p)


def _bisect_a(eps):
    # independent oracle: plain bisection on the residual with a fixed bracket
    lo, hi = 0.0, 1.0
    while a_residual(hi, eps) < 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if a_residual(mid, eps) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("eps,approx", [(1.0, 1.1447), (0.5, 1.929)])
def test_solve_a_values(eps, approx):
    a = solve_a(eps)
    assert a == pytest.approx(approx, abs=5e-4)
    assert a == pytest.approx(_bisect_a(eps), rel=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_solve_a_residual(eps):
    a = solve_a(eps)
    assert abs(a_residual(a, eps)) < 1e-12


@given(st.floats(min_value=1e-3, max_value=1e2), st.floats(min_value=1.01, max_value=3.0))
def test_solve_a_decreasing(eps, factor):
    assert solve_a(eps * factor) < solve_a(eps)
