import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from sgplate.discretization import (assemble, assemble_stiffness, basis_ders, build_space, eval_field,
                                    export_coo, find_span, greville, open_uniform_knots, push_forward,
                                    read_coo)
from sgplate.errors import InvalidDegree, OrderTooHigh
from sgplate.fields import AnalyticField
from sgplate.geometry import MappedDomain
from sgplate.material import MaterialField


@given(st.integers(3, 8), st.integers(1, 10), st.floats(0.0, 1.0))
def test_partition_of_unity_and_derivative_sum(p, n_el, x):
    knots = open_uniform_knots(0.0, 1.0, p, n_el)
    span = find_span(knots, p, np.array([x]))
    d = basis_ders(knots, p, span, np.array([x]), 3)
    assert d[0].sum() == pytest.approx(1.0, abs=1e-13)
    assert np.abs(d[1:].sum(axis=1)).max() < 1e-9 * n_el**3
    assert d[0].min() >= -1e-15


@given(st.integers(3, 6), st.integers(1, 6))
def test_greville_reproduces_linear(p, n_el):
    knots = open_uniform_knots(0.0, 2.0, p, n_el)
    g = greville(knots, p)
    x = np.linspace(0, 2, 17)
    span = find_span(knots, p, x)
    d = basis_ders(knots, p, span, x, 1)
    vals = np.array([sum(d[0, r, m] * g[span[m] - p + r] for r in range(p + 1)) for m in range(x.size)])
    assert np.allclose(vals, x, atol=1e-13)


def test_basis_derivative_matches_finite_difference():
    p, knots = 5, open_uniform_knots(0.0, 1.0, 5, 4)
    x, h = np.array([0.3]), 1e-6
    span = find_span(knots, p, x)
    d = basis_ders(knots, p, span, x, 1)
    dp = basis_ders(knots, p, span, x + h, 0)[0]
    dm = basis_ders(knots, p, span, x - h, 0)[0]
    assert np.allclose(d[1], (dp - dm) / (2 * h), atol=1e-6)


def test_degree_checks(disk):
    with pytest.raises(InvalidDegree):
        build_space(disk, 2, 4)
    with pytest.raises(InvalidDegree):
        build_space(disk, 9, 4)


def test_dimensions_on_unit_square():
    dom = MappedDomain(1.0, 1.0, ("x1", "x2"))
    assert build_space(dom, 3, 1).dim == 16
    assert build_space(dom, 3, 4).dim == 49


@given(st.sampled_from(["x1**3", "x1*x2**2 - x2", "x1**4 + x2**4"]))
def test_interpolation_reproduces_polynomials(expr):
    from sgplate.geometry import Disk

    space = build_space(Disk(1.0), 4, 3)
    c = space.interpolation_coefficients(AnalyticField(expr))
    pts = np.array([[0.1, 0.2], [-0.5, 0.3], [0.0, -0.7]])
    D = eval_field(space, c, pts, 3)
    ref = AnalyticField(expr).derivatives(pts[:, 0], pts[:, 1], 3)
    for a, b in zip(D, ref):
        assert np.allclose(a, b, atol=1e-10)


def test_symmetric_and_kernel_is_affine(unit_material, disk):
    system = assemble(build_space(disk, 4, 4), unit_material)
    assert system.symmetry_defect() <= 1e-12
    assert system.kernel_defect() <= 1e-10


def test_single_element_kernel_dimension(unit_material):
    dom = MappedDomain(1.0, 1.0, ("x1", "x2"))
    K = assemble(build_space(dom, 3, 1), unit_material).K.toarray()
    ev = np.linalg.eigvalsh(K)
    assert np.sum(np.abs(ev) < 1e-10 * ev.max()) == 3


def test_quadrature_refinement_stable(rectangle):
    mat = MaterialField(mu="1 + x1**2/4", lam="1/2 + x2/8")
    space = build_space(rectangle, 3, 4)
    K0 = assemble_stiffness(space, mat)[0]
    K2 = assemble_stiffness(space, mat, extra_order=2)[0]
    assert abs(K2 - K0).max() <= 1e-10 * abs(K0).max()


def test_threads_do_not_change_assembly(unit_material, rectangle):
    space = build_space(rectangle, 4, 4)
    K1 = assemble_stiffness(space, unit_material, threads=1)[0]
    K4 = assemble_stiffness(space, unit_material, threads=4)[0]
    assert (K1 != K4).nnz == 0


def test_push_forward_against_sympy():
    # u(x) = x1^2 x2 under x = (xi1 + xi2^2/4, xi2 + xi1 xi2 / 5)
    a, b = sp.symbols("a b")
    F = (a + b**2 / 4, b + a * b / 5)
    u = lambda x1, x2: x1**2 * x2  # noqa: E731
    ucomp = u(*F)
    dom = MappedDomain(1.0, 1.0, ("x1 + x2**2/4", "x2 + x1*x2/5"))
    xi = np.array([[0.3, 0.6]])
    S, R, Z = dom.map_jacobians(xi[:, 0], xi[:, 1])
    param = [np.array([float(sp.diff(ucomp, a, k - j, b, j).subs({a: 0.3, b: 0.6})) for j in range(k + 1)])
             .reshape(k + 1, 1, 1) for k in range(4)]
    phys = push_forward(param, S, R, Z)
    X = dom.map(0.3, 0.6)
    ref = AnalyticField("x1**2*x2").derivatives(X[0], X[1], 3)
    for k in range(4):
        assert np.allclose(phys[k].ravel(), np.ravel(ref[k]), atol=1e-12)
    with pytest.raises(OrderTooHigh):
        push_forward(param + [param[-1]], S, R, Z)


def test_eval_order_limited_by_degree(disk):
    space = build_space(disk, 3, 2)
    with pytest.raises(OrderTooHigh):
        eval_field(space, np.zeros(space.dim), np.array([[0.0, 0.0]]), 4)


def test_coo_round_trip(tmp_path, unit_material, disk):
    K = assemble(build_space(disk, 3, 2), unit_material).K
    export_coo(K, tmp_path / "K.coo")
    assert (read_coo(tmp_path / "K.coo") != K).nnz == 0
