import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgplate.errors import (DegenerateDenominator, OriginSingular, OutOfRange, RadiusOrdering, RadiusOutOfDomain,
                            SupportViolation)
from sgplate.fields import AnalyticField, AnnularBump, X1, X2, harmonic_polynomial
from sgplate.uc_lab import (CarlemanWeight, ball_profile, caccioppoli_report, carleman_sweep, doubling_radii,
                            doubling_report, fifth_order_symbolic, harmonic_battery, identity_check,
                            reduction_check, sweep_taus, three_sphere_report, three_sphere_theta, weight_eval)


@given(st.sampled_from([0.2, 0.25, 0.5]), st.floats(0.0, 1.0))
def test_weight_bounds(eps, r):
    rho = CarlemanWeight(eps).phi(r)
    assert r / 2 ** (1 / eps) <= rho <= r


def test_weight_domain_errors():
    w = CarlemanWeight(0.5)
    with pytest.raises(OutOfRange):
        weight_eval(w, np.array([1.5, 0.0]))
    with pytest.raises(OriginSingular):
        weight_eval(w, np.array([0.0, 0.0]), power=-2)
    with pytest.raises(ValueError):
        CarlemanWeight(0.7)
    assert weight_eval(w, np.array([0.0, 0.0]), power=0) == 1.0


@given(st.integers(1, 3), st.floats(0.05, 0.3), st.floats(0.2, 0.5), st.integers(-2, 2))
def test_identities_on_bumps(which, a, width, c):
    u = AnnularBump(a, a + width, f"1 + {c}*x1*x2")
    zeta = AnalyticField(f"exp(x1/3) * (1 + x2**2)")
    assert identity_check(which, u, zeta).relative_gap < 1e-7


@given(st.integers(0, 10_000))
def test_reduction_on_random_polynomials(seed):
    from sgplate.uc_lab import random_polynomial

    rng = np.random.default_rng(seed)
    u = AnalyticField(random_polynomial(rng, 6))
    b0 = 4 + random_polynomial(rng, 2, 0.125)
    b1 = 2 + random_polynomial(rng, 2, 0.125)
    assert reduction_check(u, b0=b0, b1=b1).relative_gap < 1e-6


def test_reduction_constant_coefficient_value(unit_material):
    # h = (b0 + 2 b1) Lap^3 x1^6 = 720 (b0 + 2 b1) = 168 for unit moduli and lengths
    res = reduction_check(AnalyticField("x1**6"), mat=unit_material)
    assert np.allclose(res.h_tensor, 168.0, rtol=1e-12)


def test_fifth_order_symbolic_is_zero():
    assert fifth_order_symbolic(1 + X1**2 - X1 * X2 / 2, 2 + X2 / 3 + X1 * X2) == 0
    assert fifth_order_symbolic("3 + x1", "1") == 0


def test_carleman_sweep_properties():
    u = AnnularBump(0.2, 0.4, "x1")
    taus = sweep_taus(8.0, 5)
    res = carleman_sweep(1, u, CarlemanWeight(0.5), taus)
    assert np.all(np.isfinite(res.ratio)) and res.constant == res.ratio.max()
    # both sides grow with tau while the ratio stays bounded
    assert np.all(np.diff(res.log_lhs) > 0)
    fine = carleman_sweep(1, u, CarlemanWeight(0.5), taus, refine=2)
    assert abs(fine.constant / res.constant - 1) < 0.05


def test_carleman_preconditions():
    w = CarlemanWeight(0.5)
    with pytest.raises(ValueError):
        carleman_sweep(3, AnnularBump(0.1, 0.4), w, [8.0])
    with pytest.raises(SupportViolation):
        carleman_sweep(1, AnalyticField("x1"), w, [8.0])
    with pytest.raises(SupportViolation):
        carleman_sweep(1, AnnularBump(0.1, 0.8), w, [8.0], R1=0.5)
    with pytest.raises(ValueError):
        carleman_sweep(2, AnnularBump(0.1, 0.4), w, [8.0], doubling_r=0.2)


@given(st.integers(0, 6), st.floats(0.01, 0.9))
def test_harmonic_ball_integrals(m, r):
    # int_{B_r} (Re z^m)^2 = pi r^(2m+2) / (2(m+1)) for m >= 1, pi r^2 for m = 0
    u = AnalyticField(harmonic_polynomial(m))
    exact = np.pi * r**2 if m == 0 else np.pi * r ** (2 * m + 2) / (2 * (m + 1))
    assert ball_profile(u, [r]).l2[0] == pytest.approx(exact, rel=1e-10)


def test_doubling_ratios_exact():
    R1 = 0.5
    for m, u in enumerate(harmonic_battery()):
        rep = doubling_report(ball_profile(u, doubling_radii(R1)), R1)
        expected = 4.0 ** (m + 1) if m > 0 else 4.0
        assert all(v == pytest.approx(expected, rel=1e-7) for v in rep.ratios.values())
        assert np.isfinite(rep.certified_C)


def test_three_sphere():
    assert three_sphere_theta(2.0, 1.0) == 1 / 17
    u = AnalyticField("x1")
    R1 = 0.5
    prof = ball_profile(u, doubling_radii(R1))
    rep = three_sphere_report(prof, R1 / 2**10, R1 / 2**9, R1)
    assert rep.theta == 1 / 17
    assert rep.lhs <= rep.rhs * (1 + 1e-12)
    with pytest.raises(RadiusOrdering):
        three_sphere_report(prof, R1 / 2**9, R1 / 2**9, R1)
    with pytest.raises(RadiusOrdering):
        three_sphere_report(prof, R1 / 2**8, R1 / 2**7, R1)


def test_degenerate_profile():
    R1 = 0.5
    u = AnnularBump(0.1, 0.4)  # vanishes near the origin
    with pytest.raises(DegenerateDenominator):
        doubling_report(ball_profile(u, doubling_radii(R1)), R1)


@given(st.lists(st.floats(0.01, 0.9), min_size=2, max_size=6, unique=True))
def test_ball_profile_monotone(radii):
    prof = ball_profile(AnalyticField("1 + x1*x2 + x2**3"), radii)
    assert np.all(np.diff(prof.l2) >= 0)


def test_radius_out_of_domain(unit_material, disk):
    from sgplate.discretization import SplineField, build_space

    space = build_space(disk, 3, 2)
    with pytest.raises(RadiusOutOfDomain):
        ball_profile(SplineField(space, np.zeros(space.dim)), [1.5])


def test_caccioppoli_linear_field():
    got = caccioppoli_report(AnalyticField("x1"), 0.5)
    assert np.allclose(got, [1, 0, 0, 0, 0, 0], atol=1e-12)
