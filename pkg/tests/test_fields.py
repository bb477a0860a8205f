import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgplate.fields import AnalyticField, AnnularBump, harmonic_polynomial, lap_derivative, parse_expression


@given(st.integers(0, 8))
def test_harmonic_polynomials_are_harmonic(m):
    u = AnalyticField(harmonic_polynomial(m))
    D = u.derivatives(np.array([0.3, -0.2]), np.array([0.1, 0.7]), max(m, 2))
    assert np.allclose(lap_derivative(D, 1), 0, atol=1e-12)


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_bump_fast_derivatives_match_reference(x, y):
    b = AnnularBump(0.1, 0.8, "1 + x1 - x2**2")
    fast = b.derivatives(np.array([x]), np.array([y]), 6)
    for k in range(7):
        for j in range(k + 1):
            ref = b.evaluate_partial(k - j, j, np.array([x]), np.array([y]))
            assert fast[k][j] == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_bump_support_and_smoothness():
    b = AnnularBump(0.2, 0.5)
    r = np.array([0.1, 0.2, 0.5, 0.6])
    assert np.all(b(r, 0 * r)[[0, 3]] == 0)
    # C^6 at the support edges: sixth derivative still vanishes there
    D = b.derivatives(np.array([0.2, 0.5]), np.zeros(2), 6)
    assert np.abs(D[6]).max() < 1e-12


def test_parse_expression_rejects_unknowns():
    with pytest.raises(ValueError):
        parse_expression("x3 + 1")
    with pytest.raises(ValueError):
        parse_expression("__import__('os')")
    assert parse_expression(2) == 2
