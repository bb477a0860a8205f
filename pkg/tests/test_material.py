import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgplate.errors import ConvexityViolation, EllipticityViolation
from sgplate.material import (MaterialField, contract_Q, convexity_exact, convexity_probe, couple_M, couple_Mh,
                              eval_coefficients, eval_tensors, quadratic_form_matrix, random_symmetric)

admissible = st.builds(
    MaterialField,
    mu=st.floats(0.1, 10.0),
    lam=st.floats(-0.05, 10.0),
    t=st.floats(0.2, 3.0),
    l0=st.floats(0.2, 3.0),
    l1=st.floats(0.2, 3.0),
    l2=st.floats(0.2, 3.0),
    q9_fraction=st.floats(0.0, 1.0),
)


def _tensors(mat):
    return eval_tensors(eval_coefficients(mat))


@given(admissible, st.integers(0, 2**32 - 1))
def test_pairwise_symmetry(mat, seed):
    rng = np.random.default_rng(seed)
    T = _tensors(mat)
    for tensor, order in ((T.P, 2), (T.Ph, 2), (T.Q, 3)):
        A, B = random_symmetric(rng, order), random_symmetric(rng, order)
        k = 2 * order
        ab = np.tensordot(np.tensordot(tensor, B, order), A, order)
        ba = np.tensordot(np.tensordot(tensor, A, order), B, order)
        scale = np.abs(quadratic_form_matrix(tensor, order)).max() * np.linalg.norm(A) * np.linalg.norm(B)
        assert abs(ab - ba) <= 1e-12 * scale, k


@given(admissible, st.integers(0, 2**32 - 1))
def test_closed_form_matches_contraction(mat, seed):
    T = _tensors(mat)
    D3 = random_symmetric(np.random.default_rng(seed), 3, 5)
    a, b = couple_Mh(T, D3), contract_Q(T, D3)
    assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()


@given(admissible)
def test_split_constraint(mat):
    c = eval_coefficients(mat)
    assert abs(c.split_residual()) <= 1e-12 * c.b1


@given(admissible, st.integers(0, 1000))
def test_probe_positive_and_above_exact_minimum(mat, seed):
    T = _tensors(mat)
    xp, xq = convexity_probe(T, 100, seed)
    ep, eq = convexity_exact(T)
    assert xp > 0 and xq > 0
    assert xp >= ep * (1 - 1e-12) and xq >= eq * (1 - 1e-12)


@given(admissible, st.floats(0.0, 1.0), st.integers(0, 1000))
def test_probe_invariant_under_resplit(mat, frac, seed):
    alt = MaterialField(mu=mat.mu, lam=mat.lam, t=mat.t, l0=mat.l0, l1=mat.l1, l2=mat.l2, q9_fraction=frac)
    a = convexity_probe(_tensors(mat), 100, seed)
    b = convexity_probe(_tensors(alt), 100, seed)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_couple_M_of_identity_hessian():
    # D^2 u = I gives M = -(B(1 + nu) + ...) I for isotropic tensors; check isotropy and sign
    T = _tensors(MaterialField(mu=1, lam=1))
    M = couple_M(T, np.eye(2))
    assert M[0, 1] == pytest.approx(0.0, abs=1e-15)
    assert M[0, 0] == pytest.approx(M[1, 1])
    assert M[0, 0] < 0


def test_plate_modulus_formula():
    c = eval_coefficients(MaterialField(mu=1, lam=1))
    # mu = lam = 1: E = 5/2, nu = 1/4, B = E / (12 (1 - nu^2)) = 2/9
    assert float(c.E) == pytest.approx(2.5)
    assert float(c.nu) == pytest.approx(0.25)
    assert float(c.B) == pytest.approx(2 / 9)


def test_variable_moduli_evaluated_pointwise():
    mat = MaterialField(mu="1 + x1**2", lam="x2")
    c = eval_coefficients(mat, np.array([0.0, 1.0]), np.array([0.0, 2.0]))
    assert np.allclose(c.a0, [2.0, 4.0])
    assert not mat.is_constant


def test_ellipticity_violation():
    with pytest.raises(EllipticityViolation):
        eval_coefficients(MaterialField(mu=-1, lam=1))
    with pytest.raises(EllipticityViolation):
        eval_coefficients(MaterialField(mu=1, lam=-1))


def test_probe_rejects_nonconvex():
    T = _tensors(MaterialField(mu=1, lam=1))
    from dataclasses import replace

    bad = replace(T, Q=-T.Q)
    with pytest.raises(ConvexityViolation):
        convexity_probe(bad, 10, 0)


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        MaterialField(mu=1, lam=1, t=0)
    with pytest.raises(ValueError):
        MaterialField(mu="1 + y", lam=1)
