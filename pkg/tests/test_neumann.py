import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from sgplate.discretization import assemble, build_space
from sgplate.errors import InsufficientSmoothness
from sgplate.experiments import exact_solution_expr
from sgplate.fields import X1, X2, AnalyticField, AnnularBump, harmonic_polynomial
from sgplate.geometry import MappedDomain
from sgplate.neumann import (NeumannData, compatibility_check, equilibrium_residual, fourier_derivative,
                             fourier_interpolate, synthesize)


@given(st.integers(1, 20), st.floats(0.5, 10.0))
def test_fourier_derivative_of_trig(k, L):
    s = np.arange(256) * L / 256
    f = np.sin(2 * np.pi * k * s / L)
    w = 2 * np.pi * k / L
    assert np.allclose(fourier_derivative(f, L), w * np.cos(w * s), atol=1e-9 * w)
    assert np.allclose(fourier_derivative(f, L, 2), -(w**2) * f, atol=1e-9 * w**2)


def test_fourier_interpolation_exact_for_band_limited():
    L = 3.0
    s = np.arange(64) * L / 64
    f = np.cos(2 * np.pi * 3 * s / L) + 0.5
    t = np.array([0.123, 1.7, 2.99])
    assert np.allclose(fourier_interpolate(f, L, t), np.cos(2 * np.pi * 3 * t / L) + 0.5, atol=1e-13)


def test_affine_fields_produce_zero_data(unit_material, disk):
    data = synthesize("1 + 2*x1 - x2", unit_material, disk, n=64)
    assert data.is_zero()


@given(st.floats(-3, 3).filter(lambda a: abs(a) > 1e-3))
def test_synthesis_is_linear(a):
    from sgplate.geometry import Disk
    from sgplate.material import MaterialField

    mat, dom = MaterialField(mu=1, lam=1), Disk(1.0)
    u = harmonic_polynomial(3) + X1**2 * X2
    d1 = synthesize(u, mat, dom, n=64)
    d2 = synthesize(sp.nsimplify(a) * u, mat, dom, n=64)
    for x, y in ((d1.Vhat, d2.Vhat), (d1.Mn_hat, d2.Mn_hat), (d1.Mnh_hat, d2.Mnh_hat)):
        assert np.allclose(float(sp.nsimplify(a)) * x, y, rtol=1e-12, atol=1e-12 * np.abs(y).max())


def test_cubic_data_on_disk_compatible(unit_material, disk):
    for u in ("x1**3", "x2**3", "x1**2*x2", harmonic_polynomial(3)):
        rep = compatibility_check(synthesize(u, unit_material, disk), disk)
        assert rep.passed, u


def test_exact_solution_compatible_on_superellipse(unit_material, rectangle):
    u = exact_solution_expr(unit_material)
    assert equilibrium_residual(u, unit_material, rectangle) < 1e-9
    coarse = compatibility_check(synthesize(u, unit_material, rectangle, n=128), rectangle)
    fine = compatibility_check(synthesize(u, unit_material, rectangle, n=1024), rectangle)
    assert fine.passed
    assert fine.max_residual < coarse.max_residual


def test_non_solution_is_incompatible(unit_material, rectangle):
    # exp(x1) sin(x2) + x1^2 x2^3 is not in equilibrium, so the data cannot balance
    data = synthesize("exp(x1)*sin(x2) + x1**2*x2**3", unit_material, rectangle)
    assert not compatibility_check(data, rectangle).passed


def test_green_identity_on_disk(unit_material, disk):
    u = "x1**3 - 2*x1*x2**2 + x2**3"
    space = build_space(disk, 4, 4)
    system = assemble(space, unit_material, synthesize(u, unit_material, disk))
    c = space.interpolation_coefficients(AnalyticField(u))
    r = np.abs(system.K @ c - system.F).max() / (abs(system.K).max() * np.abs(c).max())
    assert r < 1e-7


def test_csv_round_trip(tmp_path, unit_material, disk):
    data = synthesize("x1**3", unit_material, disk, n=128)
    path = tmp_path / "data.csv"
    data.to_csv(path, header="# config_sha256=abc")
    back = NeumannData.from_csv(path)
    assert back.perimeter == data.perimeter
    for a, b in ((data.Vhat, back.Vhat), (data.Mn_hat, back.Mn_hat), (data.Mnh_hat, back.Mnh_hat)):
        assert np.array_equal(a, b)


def test_csv_rejects_nonuniform(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("s,Vhat,Mn_hat,Mnh_hat\n0,1,0,0\n0.1,1,0,0\n0.5,1,0,0\n")
    with pytest.raises(ValueError):
        NeumannData.from_csv(path)


def test_synthesis_refuses_corners_and_nonsmooth(unit_material):
    dom = MappedDomain(1.0, 1.0, ("x1", "x2"))
    with pytest.raises(InsufficientSmoothness):
        synthesize("x1**3", unit_material, dom)
    from sgplate.geometry import Disk

    with pytest.raises(InsufficientSmoothness):
        synthesize(AnnularBump(0.1, 0.5), unit_material, Disk(1.0))
