"""Invariant suite run by ``sgplate verify``.

Every check is seeded and single-threaded, so the report is reproducible
bit for bit.  A check is a function returning ``(value, tolerance, passed)``;
it is registered under ``(module, property)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .config import ConfigError, parse_config
from .discretization import assemble, assemble_stiffness, build_space, coercivity_constant
from .fields import X1, X2, AnalyticField
from .geometry import Disk, RoundedRectangle, hessian_from_local, surface_derivatives
from .material import (MaterialField, contract_Q, convexity_probe, couple_Mh, eval_coefficients, eval_tensors,
                       quadratic_form_matrix, random_symmetric)
from .neumann import compatibility_check, synthesize
from .solver import agree_modulo_affines, h3_error, solve
from .uc_lab import (CarlemanWeight, ball_profile, carleman_battery, carleman_sweep, doubling_radii,
                     doubling_report, fifth_order_symbolic, harmonic_battery, identity_battery, identity_check,
                     reduction_battery, reduction_check, sweep_taus, three_sphere_report, three_sphere_theta)


@dataclass(frozen=True)
class CheckResult:
    module: str
    prop: str
    value: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.module}: {self.prop} (value={self.value:.3e}, tol={self.tolerance:.1e})"


_CHECKS: list = []


def check(module: str, prop: str):
    def deco(fn):
        _CHECKS.append((module, prop, fn))
        return fn

    return deco


def _materials(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        mu, lam = rng.uniform(0.5, 2.0), rng.uniform(0.0, 2.0)
        t, l0, l1, l2 = rng.uniform(0.5, 1.5, size=4)
        q9 = rng.uniform(0, 1)
        out.append(MaterialField(mu=float(mu), lam=float(lam), t=t, l0=l0, l1=l1, l2=l2, q9_fraction=q9))
    return out


_DEFAULT = MaterialField(mu=1, lam=1)
_cache: dict = {}


def _disk_solve(expr, p=4, n_el=8):
    key = ("disk", str(expr), p, n_el)
    if key not in _cache:
        dom = Disk(1.0)
        space = build_space(dom, p, n_el)
        data = synthesize(expr, _DEFAULT, dom)
        system = assemble(space, _DEFAULT, data)
        _cache[key] = (system, solve(system))
    return _cache[key]


# -- material ---------------------------------------------------------------------------------------


def _symmetry(seed, name, order):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for mat in _materials(seed, 5):
        T = eval_tensors(eval_coefficients(mat))
        tensor = getattr(T, name)
        A = random_symmetric(rng, order, 20)
        B = random_symmetric(rng, order, 20)
        M = quadratic_form_matrix(tensor, order)
        idx = "abcd" if order == 2 else "abcdef"
        h = len(idx) // 2
        spec = f"{idx},s{idx[h:]},s{idx[:h]}->s"
        ab = np.einsum(spec, tensor, B, A)
        ba = np.einsum(spec, tensor, A, B)
        nA = np.linalg.norm(A.reshape(20, -1), axis=1)
        nB = np.linalg.norm(B.reshape(20, -1), axis=1)
        worst = max(worst, float(np.max(np.abs(ab - ba) / (np.abs(M).max() * nA * nB))))
    return worst, 1e-12, worst <= 1e-12


@check("material", "symmetry of P on symmetric pairs")
def _sym_p(seed):
    return _symmetry(seed, "P", 2)


@check("material", "symmetry of Ph on symmetric pairs")
def _sym_ph(seed):
    return _symmetry(seed, "Ph", 2)


@check("material", "symmetry of Q on symmetric triples")
def _sym_q(seed):
    return _symmetry(seed, "Q", 3)


@check("material", "closed-form high-order couple equals Q contraction")
def _equiv(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for mat in _materials(seed + 1, 10):
        T = eval_tensors(eval_coefficients(mat))
        D3 = random_symmetric(rng, 3, 10)
        a, b = couple_Mh(T, D3), contract_Q(T, D3)
        worst = max(worst, float(np.abs(a - b).max() / np.abs(b).max()))
    return worst, 1e-12, worst <= 1e-12


@check("material", "convexity probe strictly positive")
def _positivity(seed):
    lo = min(min(convexity_probe(eval_tensors(eval_coefficients(m)), 200, seed)) for m in _materials(seed + 2, 20))
    return lo, 0.0, lo > 0


@check("material", "convexity probe independent of the Q8/Q9 split")
def _split(seed):
    worst = 0.0
    for m in _materials(seed + 3, 10):
        ref = convexity_probe(eval_tensors(eval_coefficients(m)), 200, seed)
        for frac in (0.0, 0.5, 1.0):
            alt = MaterialField(mu=m.mu, lam=m.lam, t=m.t, l0=m.l0, l1=m.l1, l2=m.l2, q9_fraction=frac)
            got = convexity_probe(eval_tensors(eval_coefficients(alt)), 200, seed)
            worst = max(worst, max(abs(g / r - 1) for g, r in zip(got, ref)))
    return worst, 1e-12, worst <= 1e-12


# -- geometry ---------------------------------------------------------------------------------------


@check("geometry", "frame orthonormality and Frenet relations")
def _frenet(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    h = 1e-4
    for dom in (Disk(1.0), RoundedRectangle(1.0, 0.5)):
        s = rng.uniform(0, dom.perimeter, 1000)
        fr = dom.frame(s)
        ortho = np.abs(np.sum(fr.n * fr.tau, 1)) + np.abs(np.sum(fr.n**2, 1) - 1) + np.abs(np.sum(fr.tau**2, 1) - 1)
        # fourth-order central differences
        fs = [dom.frame(s + k * h, wrap=True) for k in (-2, -1, 1, 2)]
        dtau = (fs[0].tau - 8 * fs[1].tau + 8 * fs[2].tau - fs[3].tau) / (12 * h)
        dn = (fs[0].n - 8 * fs[1].n + 8 * fs[2].n - fs[3].n) / (12 * h)
        k = fr.curvature[:, None]
        scale = 1 + np.abs(fr.curvature).max()
        fre = max(np.abs(dtau + k * fr.n).max(), np.abs(dn - k * fr.tau).max()) / scale
        worst = max(worst, float(ortho.max()), float(fre))
    return worst, 1e-8, worst <= 1e-8


@check("geometry", "Hessian round trip through local derivatives (both variants)")
def _roundtrip(seed):
    rng = np.random.default_rng(seed)
    dom = RoundedRectangle(1.0, 0.5)
    fr = dom.frame(rng.uniform(0, dom.perimeter, 200))
    H = random_symmetric(rng, 2, 200)
    g = rng.standard_normal((200, 2))
    local = surface_derivatives(g, H, fr)
    worst = 0.0
    for variant in ("second", "secondBIS"):
        back = hessian_from_local(*local, fr, variant=variant)
        worst = max(worst, float(np.abs(back - H).max() / np.abs(H).max()))
    return worst, 1e-10, worst <= 1e-10


@check("geometry", "disk perimeter by arclength integration")
def _perimeter(seed):
    dom = Disk(1.0)
    xg, wg = leggauss(16)
    edges = np.linspace(0, 2 * np.pi, 65)
    nodes = edges[:-1, None] + 0.5 * np.diff(edges)[:, None] * (xg + 1)
    d1 = dom.curve(nodes, 1)
    length = float(np.sum(np.hypot(d1[..., 0], d1[..., 1]) * wg) * 0.5 * np.diff(edges)[0])
    err = abs(length / (2 * np.pi) - 1)
    return err, 1e-8, err <= 1e-8


# -- neumann_data ---------------------------------------------------------------------------------


@check("neumann_data", "Green identity for a spline-space field")
def _green(seed):
    dom = Disk(1.0)
    space = build_space(dom, 4, 4)
    u = AnalyticField("x1**3 - 2*x1*x2**2 + x2**3")
    system = assemble(space, _DEFAULT, synthesize(u, _DEFAULT, dom))
    c = space.interpolation_coefficients(u)
    r = np.abs(system.K @ c - system.F).max() / (abs(system.K).max() * np.abs(c).max())
    return float(r), 1e-7, r <= 1e-7


@check("neumann_data", "compatibility residuals shrink under sample refinement")
def _compat(seed):
    from .experiments import exact_solution_expr

    dom = RoundedRectangle(1.0, 0.5)
    u = exact_solution_expr(_DEFAULT)
    coarse = synthesize(u, _DEFAULT, dom, n=128)
    fine = synthesize(u, _DEFAULT, dom, n=1024)
    rc = compatibility_check(coarse, dom)
    rf = compatibility_check(fine, dom)
    ok = rf.passed and (rf.max_residual <= rc.max_residual or rc.passed)
    return rf.max_residual / rf.scale, 1e-8, bool(ok)


# -- discretization ----------------------------------------------------------------------------------


@check("discretization", "stiffness symmetric and annihilates affines")
def _kernel(seed):
    system, _ = _disk_solve("x1**3")
    v = max(system.symmetry_defect(), system.kernel_defect())
    return v, 1e-10, v <= 1e-10


@check("discretization", "coercivity on the constrained subspace stable under refinement")
def _coercive(seed):
    dom = Disk(1.0)
    cs = [coercivity_constant(assemble(build_space(dom, 3, n), _DEFAULT)) for n in (2, 4)]
    ok = cs[0] > 0 and cs[1] > 0 and cs[1] >= 0.1 * cs[0]
    return min(cs), 0.0, bool(ok)


@check("discretization", "Galerkin orthogonality of the discrete solution")
def _galerkin(seed):
    _, res = _disk_solve("x1**3")
    g = res.residual["galerkin"]
    return g, 1e-9, g <= 1e-9


@check("discretization", "stiffness stable under quadrature order + 2")
def _quad(seed):
    dom = RoundedRectangle(1.0, 0.5)
    mat = MaterialField(mu="1 + x1**2/4", lam="1/2 + x2/8")
    space = build_space(dom, 3, 4)
    K0 = assemble_stiffness(space, mat)[0]
    K2 = assemble_stiffness(space, mat, extra_order=2)[0]
    v = float(abs(K2 - K0).max() / abs(K0).max())
    return v, 1e-10, v <= 1e-10


# -- solver -------------------------------------------------------------------------------------------


@check("solver", "manufactured cubic recovered modulo affines")
def _cubic(seed):
    system, res = _disk_solve("x1**3")
    e = h3_error(system.space, res.coefs, AnalyticField("x1**3"))["h3_relative"]
    return e, 1e-7, e <= 1e-7


@check("solver", "uniqueness modulo affines under unknown permutation")
def _unique(seed):
    system, res = _disk_solve("x1**3")
    perm = np.random.default_rng(seed).permutation(system.n)
    other = solve(system, permutation=perm)
    d = agree_modulo_affines(system.space, res.coefs, other.coefs)
    return d, 1e-10, d <= 1e-10


@check("solver", "energy identity a(u,u) = L(u)")
def _energy(seed):
    system, res = _disk_solve("x1**3")
    e = abs(res.energy - res.coefs @ system.F) / abs(res.energy)
    return float(e), 1e-9, e <= 1e-9


@check("solver", "H3-seminorm convergence rate >= p - 2 - 0.3")
def _rate(seed):
    from .experiments import exact_solution_expr

    dom = Disk(1.0)
    u = AnalyticField(exact_solution_expr(_DEFAULT))
    data = synthesize(u, _DEFAULT, dom)
    p, ns = 4, (4, 8, 16)
    errs = [h3_error(sp_, solve(assemble(sp_, _DEFAULT, data)).coefs, u)["seminorm3"]
            for sp_ in (build_space(dom, p, n) for n in ns)]
    rate = float(np.polyfit(np.log(2.0 / np.array(ns)), np.log(errs), 1)[0])
    return rate, p - 2 - 0.3, rate >= p - 2 - 0.3


# -- uc_lab ------------------------------------------------------------------------------------------


@check("uc_lab", "weight bounds |x|/2^(1/eps) <= rho <= |x|")
def _weight(seed):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0, 1, 10_000))
    ok, worst = True, 0.0
    for eps in (0.2, 0.25, 0.5):
        rho = CarlemanWeight(eps).phi(r)
        lo = r / 2 ** (1 / eps)
        ok &= bool(np.all(lo <= rho) and np.all(rho <= r))
        worst = max(worst, float(np.max(np.maximum(lo - rho, rho - r))))
    return worst, 0.0, ok


@check("uc_lab", "identities 1-3 on the 20-pair battery")
def _ident(seed):
    pairs = identity_battery(seed)
    g = max(identity_check(k, u, z).relative_gap for k in (1, 2, 3) for u, z in pairs)
    return g, 1e-7, g <= 1e-7


@check("uc_lab", "sixth-order reduction on the degree-6 battery")
def _reduction(seed):
    g = max(reduction_check(u, b0=b0, b1=b1).relative_gap for u, b0, b1 in reduction_battery(seed))
    return g, 1e-6, g <= 1e-6


@check("uc_lab", "fifth-order coefficient equals (3 b0 + 6 b1),a symbolically")
def _fifth(seed):
    ok = all(fifth_order_symbolic(b0, b1) == 0 for b0, b1 in (
        (1 + X1**2 - X1 * X2 / 2, 2 + X2 / 3 + X1 * X2), (3 + X1**2 + X2**2, 1 + X1 - X2**2 / 5)))
    return 0.0 if ok else 1.0, 0.0, ok


@check("uc_lab", "Carleman constants finite and quadrature-stable to 5%")
def _carleman(seed):
    taus = sweep_taus(8.0, 5)
    battery = carleman_battery(seed)
    worst = 0.0
    for order, eps in ((1, 0.5), (2, 0.5), (3, 0.2)):
        w = CarlemanWeight(eps)
        for u in battery:
            a = carleman_sweep(order, u, w, taus).constant
            b = carleman_sweep(order, u, w, taus, refine=2).constant
            if not np.isfinite(a):
                return float("inf"), 0.05, False
            worst = max(worst, abs(b / a - 1))
    return worst, 0.05, worst <= 0.05


@check("uc_lab", "doubling ratios 4^(m+1) and three-sphere exponent 1/17")
def _doubling(seed):
    R1 = 0.5
    radii = doubling_radii(R1)
    worst = abs(three_sphere_theta(2.0, 1.0) * 17 - 1)
    for m, u in enumerate(harmonic_battery()):
        expect = 4.0 ** (max(m, 1) + 1) if m else 4.0
        prof = ball_profile(u, radii)
        rep = doubling_report(prof, R1)
        worst = max(worst, max(abs(v / expect - 1) for v in rep.ratios.values()))
        ts = three_sphere_report(prof, R1 / 2**10, R1 / 2**9, R1)
        if not (np.isfinite(rep.certified_C) and np.isfinite(ts.C_min) and ts.lhs <= ts.rhs * (1 + 1e-12)):
            return float("inf"), 1e-7, False
    return worst, 1e-7, worst <= 1e-7


@check("uc_lab", "doubling and three-sphere finite for a solver output")
def _doubling_solver(seed):
    from .discretization import SplineField

    system, res = _disk_solve("x1**3")
    f = SplineField(system.space, res.coefs, "solve[x1**3]")
    R1 = 0.5
    prof = ball_profile(f, doubling_radii(R1))
    rep = doubling_report(prof, R1)
    ts = three_sphere_report(prof, R1 / 2**10, R1 / 2**9, R1)
    mono = bool(np.all(np.diff(prof.l2) >= 0))
    ok = mono and np.isfinite(rep.certified_C) and np.isfinite(ts.C_min)
    return rep.certified_C, float("inf"), bool(ok)


# -- cli ----------------------------------------------------------------------------------------------


@check("cli", "missing degree raises ConfigError naming the key")
def _config(seed):
    try:
        parse_config({"experiment": "solve", "discretization": {"n_el": 4}, "data": {"u_star": "x1**3"}})
    except ConfigError as exc:
        ok = "discretization.p" in str(exc)
        return 0.0, 0.0, ok
    return 1.0, 0.0, False


def run_verify(seed: int = 0, only: str | None = None, timings: bool = False) -> list[CheckResult]:
    """Run every registered check (or those of module ``only``)."""
    _cache.clear()
    out = []
    for module, prop, fn in _CHECKS:
        if only is not None and module != only:
            continue
        t0 = time.perf_counter()
        value, tol, passed = fn(seed)
        out.append(CheckResult(module, prop, float(value), float(tol), bool(passed)))
        if timings:
            print(f"  {module}: {prop}  {time.perf_counter() - t0:.2f}s", flush=True)
    return out


def check_names() -> list[tuple[str, str]]:
    return [(m, p) for m, p, _ in _CHECKS]
