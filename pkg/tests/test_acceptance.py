"""Acceptance criteria 1-10.

Each test prints one ``PASS``/``FAIL`` line (visible even without ``-s``) with
the measured quantity and runtime, then asserts.  Runtime budgets are part of
the criteria and are asserted as well.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from sgplate.discretization import SplineField, assemble, build_space
from sgplate.experiments import exact_solution_expr
from sgplate.fields import AnalyticField, X1, X2, harmonic_polynomial
from sgplate.geometry import Disk
from sgplate.material import (MaterialField, contract_Q, convexity_probe, couple_Mh, eval_coefficients,
                              eval_tensors, quadratic_form_matrix, random_symmetric)
from sgplate.neumann import compatibility_check, synthesize
from sgplate.solver import agree_modulo_affines, h3_error, solve
from sgplate.uc_lab import (K_BAR, CarlemanWeight, ball_profile, carleman_battery, carleman_sweep,
                            doubling_radii, doubling_report, fifth_order_symbolic, harmonic_battery,
                            identity_battery, identity_check, reduction_battery, reduction_check, sweep_taus,
                            three_sphere_report, three_sphere_theta)

UNIT = MaterialField(mu=1, lam=1)


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail, elapsed, budget=None):
        within = budget is None or elapsed < budget
        status = "PASS" if ok and within else "FAIL"
        limit = f" (budget {budget:g} s)" if budget is not None else ""
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {status}  {title}: {detail}; {elapsed:.2f} s{limit}")
        assert ok, detail
        assert within, f"runtime {elapsed:.2f} s exceeds {budget} s"

    return emit


def _admissible(rng, count):
    return [MaterialField(mu=float(rng.uniform(0.2, 5)), lam=float(rng.uniform(-0.05, 5)),
                          t=float(rng.uniform(0.3, 2)), l0=float(rng.uniform(0.3, 2)),
                          l1=float(rng.uniform(0.3, 2)), l2=float(rng.uniform(0.3, 2)),
                          q9_fraction=float(rng.uniform(0, 1))) for _ in range(count)]


def test_criterion_01_tensor_algebra(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    sym = equiv = 0.0
    for mat in _admissible(rng, 100):
        T = eval_tensors(eval_coefficients(mat))
        for tensor, order in ((T.P, 2), (T.Ph, 2), (T.Q, 3)):
            A, B = random_symmetric(rng, order), random_symmetric(rng, order)
            ab = np.tensordot(np.tensordot(tensor, B, order), A, order)
            ba = np.tensordot(np.tensordot(tensor, A, order), B, order)
            scale = np.abs(quadratic_form_matrix(tensor, order)).max() * np.linalg.norm(A) * np.linalg.norm(B)
            sym = max(sym, abs(ab - ba) / scale)
        D3 = random_symmetric(rng, 3)
        a, b = couple_Mh(T, D3), contract_Q(T, D3)
        equiv = max(equiv, np.abs(a - b).max() / np.abs(b).max())
    ok = sym <= 1e-12 and equiv <= 1e-12
    report(1, "tensor symmetry and contraction equivalence", ok,
           f"max symmetry defect {sym:.2e}, max equivalence gap {equiv:.2e} (tol 1e-12)",
           time.perf_counter() - t0, 1.0)


def test_criterion_02_convexity(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    lo, drift = np.inf, 0.0
    for k, mat in enumerate(_admissible(rng, 20)):
        ref = convexity_probe(eval_tensors(eval_coefficients(mat)), 500, k)
        lo = min(lo, *ref)
        for frac in (0.0, 0.37, 1.0):
            alt = MaterialField(mu=mat.mu, lam=mat.lam, t=mat.t, l0=mat.l0, l1=mat.l1, l2=mat.l2, q9_fraction=frac)
            got = convexity_probe(eval_tensors(eval_coefficients(alt)), 500, k)
            drift = max(drift, *(abs(g / r - 1) for g, r in zip(got, ref)))
    ok = lo > 0 and drift <= 1e-12
    report(2, "convexity probe", ok, f"min estimate {lo:.3e} > 0, resplit drift {drift:.2e} (tol 1e-12)",
           time.perf_counter() - t0, 5.0)


@pytest.mark.parametrize("expr", ["x1**3", "x2**3", "x1**2*x2", "re(z^3)"])
def test_criterion_03_well_posedness(report, expr):
    t0 = time.perf_counter()
    u = harmonic_polynomial(3) if expr == "re(z^3)" else expr
    dom = Disk(1.0)
    data = synthesize(u, UNIT, dom)
    comp = compatibility_check(data, dom)
    space = build_space(dom, 4, 8)
    res = solve(assemble(space, UNIT, data))
    err = h3_error(space, res.coefs, AnalyticField(u))["h3_relative"]
    ok = comp.passed and err <= 1e-6
    report(3, f"disk solve u* = {expr}", ok,
           f"compat residual {comp.max_residual:.1e} (tol {comp.tol:.1e}), relative H3 error {err:.2e} (tol 1e-6)",
           time.perf_counter() - t0, 30.0)


def test_criterion_04_convergence(report):
    t0 = time.perf_counter()
    p, meshes = 5, (4, 8, 16, 32)
    dom = Disk(1.0)
    u = AnalyticField(exact_solution_expr(UNIT))
    data = synthesize(u, UNIT, dom)
    errs = []
    for n in meshes:
        space = build_space(dom, p, n)
        errs.append(h3_error(space, solve(assemble(space, UNIT, data)).coefs, u)["seminorm3"])
    rate = float(np.polyfit(np.log(2.0 / np.array(meshes)), np.log(errs), 1)[0])
    ok = rate >= p - 2 - 0.3
    report(4, "H3-seminorm convergence at p = 5", ok,
           f"errors {', '.join(f'{e:.2e}' for e in errs)}; slope {rate:.3f} (need >= {p - 2.3:.1f})",
           time.perf_counter() - t0, 300.0)


def test_criterion_05_kernel_and_uniqueness(report):
    t0 = time.perf_counter()
    dom = Disk(1.0)
    space = build_space(dom, 4, 8)
    data = synthesize("x1**2*x2 - x2**3/3 + x1**3", UNIT, dom)
    sys1 = assemble(space, UNIT, data)
    sys2 = assemble(space, UNIT, data, threads=4)
    kernel = sys1.kernel_defect()
    a = solve(sys1)
    b = solve(sys2, permutation=np.random.default_rng(5).permutation(sys2.n))
    gap = agree_modulo_affines(space, a.coefs, b.coefs)
    ok = kernel <= 1e-10 and gap <= 1e-10
    report(5, "affine kernel and uniqueness", ok,
           f"|K a| / |K| = {kernel:.2e}, independent solves differ by {gap:.2e} (tol 1e-10)",
           time.perf_counter() - t0)


def test_criterion_06_identities(report):
    t0 = time.perf_counter()
    pairs = identity_battery(0, 20)
    gaps = {k: max(identity_check(k, u, z).relative_gap for u, z in pairs) for k in (1, 2, 3)}
    ok = max(gaps.values()) <= 1e-7
    report(6, "weighted integration-by-parts identities", ok,
           ", ".join(f"identity {k}: {g:.2e}" for k, g in gaps.items()) + " (tol 1e-7)",
           time.perf_counter() - t0, 10.0)


def test_criterion_07_reduction(report):
    t0 = time.perf_counter()
    gap = max(reduction_check(u, b0=b0, b1=b1).relative_gap for u, b0, b1 in reduction_battery(0, 10))
    fixtures = [(1 + X1**2 - X1 * X2 / 2, 2 + X2 / 3 + X1 * X2), (3 + X1**2 + X2**2, 1 + X1 - X2**2 / 5),
                (2 + X1, 1 + X2)]
    exact = all(fifth_order_symbolic(b0, b1) == 0 for b0, b1 in fixtures)
    ok = gap <= 1e-6 and exact
    report(7, "sixth-order reduction", ok,
           f"max relative gap {gap:.2e} (tol 1e-6); fifth-order coefficient exact on {len(fixtures)} fixtures: {exact}",
           time.perf_counter() - t0, 10.0)


def test_criterion_08_carleman(report):
    t0 = time.perf_counter()
    taus = sweep_taus(8.0, 9)
    battery = carleman_battery(0)
    parts, ok = [], True
    for order, eps in ((1, 0.5), (2, 0.5), (3, 0.2)):
        w = CarlemanWeight(eps)
        consts, drift = [], 0.0
        for u in battery:
            a = carleman_sweep(order, u, w, taus).constant
            b = carleman_sweep(order, u, w, taus, refine=2).constant
            consts.append(a)
            drift = max(drift, abs(b / a - 1))
        finite = all(np.isfinite(consts))
        ok &= finite and drift <= 0.05
        parts.append(f"order {order}: C = {max(consts):.3g}, drift {drift:.1e}")
    report(8, "Carleman sweeps over tau in [8, 32]", ok, "; ".join(parts) + " (drift tol 5%)",
           time.perf_counter() - t0, 120.0)


def test_criterion_09_doubling_three_sphere(report):
    t0 = time.perf_counter()
    R1 = 0.5
    dom = Disk(1.0)
    fields = list(harmonic_battery())
    for expr in ("x1**3", exact_solution_expr(UNIT)):
        space = build_space(dom, 5, 8)
        res = solve(assemble(space, UNIT, synthesize(expr, UNIT, dom)))
        fields.append(SplineField(space, res.coefs, name=f"solve[{expr}]"))
    theta_ok = three_sphere_theta(2.0, 1.0) == 1 / 17 and K_BAR == 8
    ratio_err, finite = 0.0, True
    for k, f in enumerate(fields):
        prof = ball_profile(f, doubling_radii(R1))
        rep = doubling_report(prof, R1)
        ts = three_sphere_report(prof, R1 / 2**10, R1 / 2**9, R1)
        finite &= bool(np.isfinite(rep.certified_C) and np.isfinite(ts.C_min) and ts.lhs <= ts.rhs * (1 + 1e-12))
        finite &= ts.theta == three_sphere_theta(R1 / 2**9, R1 / 2**10)
        if k < 5:
            expected = 4.0 if k == 0 else 4.0 ** (k + 1)
            ratio_err = max(ratio_err, max(abs(v / expected - 1) for v in rep.ratios.values()))
    ok = theta_ok and finite and ratio_err <= 1e-7
    report(9, "doubling and three-sphere", ok,
           f"theta(2r, r) = 1/17: {theta_ok}, finite constants: {finite}, max ratio error {ratio_err:.1e} (tol 1e-7)",
           time.perf_counter() - t0, 60.0)


def test_criterion_10_determinism(report, tmp_path):
    t0 = time.perf_counter()
    outputs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        proc = subprocess.run([sys.executable, "-m", "sgplate.cli", "verify", "--out", str(out)],
                              capture_output=True, check=False)
        files = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
        outputs.append((proc.returncode, proc.stdout, files))
    same = outputs[0] == outputs[1]
    ok = same and outputs[0][0] == 0
    report(10, "repeated verify runs", ok,
           f"exit codes {outputs[0][0]}/{outputs[1][0]}, stdout and {len(outputs[0][2])} files byte-identical: {same}",
           time.perf_counter() - t0)
