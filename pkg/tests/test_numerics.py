import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from wavelife.numerics import adaptive_simpson, adaptive_simpson_2d, bisect_increasing


def test_bisect_finds_sqrt2():
    root = bisect_increasing(lambda x: x * x - 2.0, 0.0, 1.0)
    assert root == pytest.approx(math.sqrt(2.0), rel=1e-13)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_bisect_inverts_cube(c):
    root = bisect_increasing(lambda x: x**3 - c, 0.0, 1.0)
    assert root**3 == pytest.approx(c, rel=1e-12)


def test_simpson_polynomial_exact():
    res = adaptive_simpson(lambda x: x**3 - 2 * x + 1, 0.0, 2.0)
    assert res.converged
    assert res.value == pytest.approx(4.0 - 4.0 + 2.0, abs=1e-13)


def test_simpson_against_scipy_quad():
    f = lambda x: math.exp(-x) * math.sin(5 * x) / (1 + x)
    ref, _ = integrate.quad(f, 0.0, 3.0, epsabs=1e-14)
    res = adaptive_simpson(f, 0.0, 3.0, rtol=1e-11)
    assert res.value == pytest.approx(ref, rel=1e-9)
    assert res.error < 1e-8


def test_simpson_2d_against_scipy_dblquad():
    f = lambda x, y: math.log(1 + x + y) * (x + 1) ** 0.5
    ref, _ = integrate.dblquad(lambda x, y: f(x, y), 0.0, 1.0, lambda y: y, lambda y: 2.0)
    res = adaptive_simpson_2d(f, (0.0, 1.0), lambda y: (y, 2.0), rtol=1e-10)
    assert res.value == pytest.approx(ref, rel=1e-8)


@settings(max_examples=25)
@given(st.floats(0.1, 5.0), st.integers(0, 6))
def test_simpson_monomials(b, k):
    res = adaptive_simpson(lambda x: x**k, 0.0, b, rtol=1e-12)
    assert res.value == pytest.approx(b ** (k + 1) / (k + 1), rel=1e-10)
