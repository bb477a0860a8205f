import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgplate.errors import OutOfRange, SingularMap
from sgplate.geometry import (Disk, MappedDomain, RoundedRectangle, gradient_from_local, hessian_from_local,
                              make_domain, map_jacobians, surface_derivatives)
from sgplate.quadrature import cut_cell_rule

fraction = st.floats(0.0, 0.999999)


@given(st.floats(0.1, 10.0), fraction)
def test_disk_frame(R, f):
    dom = Disk(R)
    s = f * dom.perimeter
    fr = dom.frame(np.array([s]))
    assert fr.curvature[0] == pytest.approx(1 / R, rel=1e-12)
    assert np.allclose(fr.n[0], fr.point[0] / R, atol=1e-12)
    # counterclockwise: tau is n rotated by +90 degrees
    assert np.allclose(fr.tau[0], [-fr.n[0, 1], fr.n[0, 0]], atol=1e-12)


def test_disk_perimeter_and_area():
    dom = Disk(2.0)
    assert dom.perimeter == pytest.approx(4 * np.pi, rel=1e-12)
    assert dom.area() == pytest.approx(4 * np.pi, rel=1e-10)


@given(fraction)
def test_frame_orthonormal_on_superellipse(f):
    dom = RoundedRectangle(2.0, 1.0)
    fr = dom.frame(np.array([f * dom.perimeter]))
    assert np.dot(fr.n[0], fr.tau[0]) == pytest.approx(0.0, abs=1e-13)
    assert np.linalg.norm(fr.n[0]) == pytest.approx(1.0, abs=1e-13)
    # outward normal
    assert np.dot(fr.n[0], fr.point[0]) > 0


def test_frenet_relations_by_finite_differences(rectangle, rng):
    s = rng.uniform(0, rectangle.perimeter, 200)
    h = 1e-4
    fr = rectangle.frame(s)
    fs = [rectangle.frame(s + k * h, wrap=True) for k in (-2, -1, 1, 2)]
    dtau = (fs[0].tau - 8 * fs[1].tau + 8 * fs[2].tau - fs[3].tau) / (12 * h)
    dn = (fs[0].n - 8 * fs[1].n + 8 * fs[2].n - fs[3].n) / (12 * h)
    K = fr.curvature[:, None]
    assert np.abs(dtau + K * fr.n).max() < 1e-8
    assert np.abs(dn - K * fr.tau).max() < 1e-8


def test_superellipse_area_agrees_with_cut_cell_quadrature(rectangle):
    x0, x1, y0, y1 = rectangle.bbox
    total = 0.0
    edges_x, edges_y = np.linspace(x0, x1, 9), np.linspace(y0, y1, 5)
    for i in range(8):
        for j in range(4):
            pts, w = cut_cell_rule(rectangle, edges_x[i], edges_x[i + 1], edges_y[j], edges_y[j + 1], 8)
            total += w.sum()
    assert total == pytest.approx(rectangle.area(), rel=1e-10)


def test_disk_moments_by_cut_cells(disk):
    e = np.linspace(-1, 1, 5)
    m4 = m22 = 0.0
    for i in range(4):
        for j in range(4):
            pts, w = cut_cell_rule(disk, e[i], e[i + 1], e[j], e[j + 1], 8)
            m4 += w @ pts[:, 0] ** 4
            m22 += w @ (pts[:, 0] ** 2 * pts[:, 1] ** 2)
    assert m4 == pytest.approx(np.pi / 8, rel=1e-12)
    assert m22 == pytest.approx(np.pi / 24, rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["second", "secondBIS"]))
def test_hessian_round_trip(seed, variant):
    rng = np.random.default_rng(seed)
    dom = RoundedRectangle(1.0, 0.5)
    fr = dom.frame(rng.uniform(0, dom.perimeter, 16))
    H = rng.standard_normal((16, 2, 2))
    H = H + np.swapaxes(H, 1, 2)
    g = rng.standard_normal((16, 2))
    local = surface_derivatives(g, H, fr)
    assert np.allclose(hessian_from_local(*local, fr, variant=variant), H, atol=1e-10)
    assert np.allclose(gradient_from_local(local[0], local[1], fr), g, atol=1e-12)


def test_arclength_range_checked(disk):
    with pytest.raises(OutOfRange):
        disk.frame(np.array([-0.1]))
    with pytest.raises(OutOfRange):
        disk.frame(np.array([disk.perimeter * 1.01]))
    fr = disk.frame(np.array([disk.perimeter + 0.5]), wrap=True)
    assert np.allclose(fr.point, disk.frame(np.array([0.5])).point)


def test_sharp_corners_rejected():
    with pytest.raises(ValueError):
        RoundedRectangle(1.0, 1.0, exponent=80)


def test_mapped_affine_domain():
    dom = MappedDomain(1.0, 1.0, ("2*x1 + x2/2", "x2"))
    assert dom.is_affine
    assert dom.area() == pytest.approx(2.0, rel=1e-10)
    S, R, Z = map_jacobians(dom, np.array([[0.3, 0.4]]))
    assert np.allclose(S[0], [[2.0, 0.5], [0.0, 1.0]])
    assert np.abs(R).max() == 0 and np.abs(Z).max() == 0


def test_curved_map_perimeter():
    # polar-like annular sector: inner radius 1, outer 2, angle 1 radian
    dom = MappedDomain(1.0, 1.0, ("(1 + x1)*cos(x2)", "(1 + x1)*sin(x2)"))
    assert not dom.is_affine
    assert dom.perimeter == pytest.approx(2 + 1 + 2, rel=1e-12)
    assert dom.area() == pytest.approx(1.5, rel=1e-8)


def test_singular_map_rejected():
    with pytest.raises(SingularMap):
        MappedDomain(1.0, 1.0, ("x1", "x1*x2"))


def test_make_domain():
    assert isinstance(make_domain({"kind": "disk", "R": 2}), Disk)
    assert isinstance(make_domain({"kind": "rectangle", "a": 1, "b": 2}), RoundedRectangle)
    assert isinstance(make_domain({"kind": "mapped", "base": [1, 1], "map": ["x1", "x2"]}), MappedDomain)
    with pytest.raises(ValueError):
        make_domain({"kind": "triangle"})
