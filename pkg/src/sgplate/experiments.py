"""Experiment drivers shared by the CLI and the scripts.

Each driver takes an :class:`ExperimentConfig` and returns ``(tables, summary)``:
``tables`` maps a CSV file name to ``(columns, rows)`` and ``summary`` is a
JSON-serialisable dict.
"""

from __future__ import annotations

import re

import numpy as np
import sympy as sp

from .config import ExperimentConfig
from .discretization import SplineField, assemble, build_space, eval_field, export_coo
from .fields import X1, X2, AnalyticField, harmonic_polynomial
from .geometry import make_domain
from .material import MaterialField, eval_coefficients
from .neumann import NeumannData, compatibility_check, synthesize
from .solver import h3_error, solve
from .uc_lab import (CarlemanWeight, ball_profile, caccioppoli_report, carleman_battery, carleman_sweep,
                     doubling_radii, doubling_report, fifth_order_symbolic, identity_battery, identity_check,
                     reduction_battery, reduction_check, sweep_taus, three_sphere_report)


def make_material(spec: dict) -> MaterialField:
    allowed = {"mu", "lam", "t", "l0", "l1", "l2", "r0", "smoothness", "q9_fraction"}
    unknown = set(spec) - allowed
    if unknown:
        from .errors import ConfigError

        raise ConfigError(f"unknown keys in 'material': {', '.join(sorted(unknown))}")
    kwargs = dict(spec)
    kwargs.setdefault("mu", 1)
    kwargs.setdefault("lam", 1)
    return MaterialField(**kwargs)


def exact_solution_expr(mat: MaterialField) -> sp.Expr:
    """Smooth non-polynomial solution of the constant-coefficient plate equation.

    ``exp(x1) cos(x2)`` is harmonic; ``exp(k d.x)`` with ``k^2 = D/(b0 + 2 b1)``
    and ``D = B + a0 + 4 a1 + a2`` balances the fourth- and sixth-order terms.
    """
    if not mat.is_constant:
        raise ValueError("closed-form solution needs constant coefficients")
    c = eval_coefficients(mat)
    k = sp.sqrt(sp.nsimplify(float((c.B + c.a0 + 4 * c.a1 + c.a2) / (c.b0 + 2 * c.b1)), rational=True))
    return sp.exp(X1) * sp.cos(X2) + sp.exp(k * (sp.Rational(3, 5) * X1 + sp.Rational(4, 5) * X2)) / k**3


def field_from_name(name: str) -> AnalyticField:
    m = re.fullmatch(r"\s*re\(z\^(\d+)\)\s*", str(name))
    if m:
        return AnalyticField(harmonic_polynomial(int(m.group(1))), name=f"Re z^{m.group(1)}")
    return AnalyticField(name, name=str(name))


def make_data(cfg: ExperimentConfig, mat, dom, u_star=None) -> NeumannData:
    d = cfg.data
    if d.source == "csv":
        return NeumannData.from_csv(d.path)
    if d.source == "analytic":
        s = sp.Symbol("s", real=True)
        funcs = []
        for text in (d.Vhat, d.Mn_hat, d.Mnh_hat):
            expr = sp.sympify(str(text), locals={"s": s, "pi": sp.pi, "L": sp.Float(dom.perimeter)})
            f = sp.lambdify(s, expr, "numpy")
            funcs.append(lambda x, f=f: np.asarray(f(x), float) * np.ones_like(x))
        return NeumannData.from_functions(dom.perimeter, *funcs)
    return synthesize(u_star if u_star is not None else d.u_star, mat, dom, n=d.samples)


def _grid_points(dom, n):
    if hasattr(dom, "contains"):
        x0, x1, y0, y1 = dom.bbox
        g1, g2 = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n), indexing="ij")
        keep = dom.contains(g1, g2)
        return np.stack([g1[keep], g2[keep]], 1)
    g1, g2 = np.meshgrid(np.linspace(0, dom.a, n), np.linspace(0, dom.b, n), indexing="ij")
    return dom.map(g1.ravel(), g2.ravel())


def run_solve(cfg: ExperimentConfig, out_dir=None, threads: int = 1):
    dom = make_domain(cfg.domain)
    mat = make_material(cfg.material)
    disc = cfg.discretization
    space = build_space(dom, disc.p, disc.n_el, disc.quad_order)
    data = make_data(cfg, mat, dom)
    comp = compatibility_check(data, dom)
    system = assemble(space, mat, data, threads=threads)
    result = solve(system)
    pts = _grid_points(dom, cfg.output.grid)
    D = eval_field(space, result.coefs, pts, 1)
    rows = [(x[0], x[1], d0, d1, d2) for x, d0, d1, d2 in zip(pts, D[0][0], D[1][0], D[1][1])]
    summary = {
        "experiment": "solve",
        "domain": dom.describe(),
        "p": disc.p,
        "n_el": disc.n_el,
        "dofs": space.dim,
        "compatibility_residuals": list(comp.residuals),
        "compatibility_passed": comp.passed,
        "symmetry_defect": system.symmetry_defect(),
        **result.to_record(),
    }
    if cfg.data.source == "synthesize" and cfg.data.u_star:
        err = h3_error(space, result.coefs, AnalyticField(cfg.data.u_star))
        summary["h3_error_relative"] = err["h3_relative"]
        summary["seminorm3_error"] = err["seminorm3"]
    tables = {"solution.csv": (("x1", "x2", "u", "u1", "u2"), rows)}
    s, V, Mn, Mnh = data.samples()
    tables["boundary_data.csv"] = (("s", "Vhat", "Mn_hat", "Mnh_hat"), list(zip(s, V, Mn, Mnh)))
    if cfg.output.export_matrix and out_dir is not None:
        export_coo(system.K, f"{out_dir}/stiffness.coo")
    return tables, summary


def run_convergence(cfg: ExperimentConfig, threads: int = 1):
    dom = make_domain(cfg.domain)
    mat = make_material(cfg.material)
    p = cfg.discretization.p
    expr = cfg.convergence.u_star or exact_solution_expr(mat)
    u_star = AnalyticField(expr)
    data = synthesize(u_star, mat, dom, n=cfg.data.samples)
    rows, hs, errs = [], [], []
    for n_el in cfg.convergence.n_el:
        space = build_space(dom, p, int(n_el))
        result = solve(assemble(space, mat, data, threads=threads))
        e = h3_error(space, result.coefs, u_star, extra_order=cfg.convergence.extra_quad)
        h = (dom.bbox[1] - dom.bbox[0]) / n_el if hasattr(dom, "bbox") else 1.0 / n_el
        rows.append((int(n_el), space.dim, h, e["seminorm3"], e["h3_relative"]))
        hs.append(h)
        errs.append(e["seminorm3"])
    rate = float(np.polyfit(np.log(hs), np.log(errs), 1)[0]) if len(hs) > 1 else float("nan")
    summary = {"experiment": "convergence", "p": p, "u_star": str(expr), "rate": rate,
               "expected_rate": p - 2, "domain": dom.describe()}
    return {"convergence.csv": (("n_el", "dofs", "h", "seminorm3_error", "h3_relative"), rows)}, summary


def run_carleman(cfg: ExperimentConfig):
    c = cfg.carleman
    taus = sweep_taus(c.tau_bar, c.tau_count)
    battery = carleman_battery(cfg.seed, c.R1)
    rows = []
    constants, stability = {}, {}
    for order in c.orders:
        eps = float(c.epsilon.get(order, 0.2 if order == 3 else 0.5))
        w = CarlemanWeight(eps)
        dr = c.doubling_r if order != 2 else None
        consts, drift = [], []
        for k, u in enumerate(battery):
            res = carleman_sweep(order, u, w, taus, R1=c.R1, doubling_r=dr)
            fine = carleman_sweep(order, u, w, taus, R1=c.R1, doubling_r=dr, refine=2)
            for tau, lo, hi, ratio in zip(res.taus, res.lhs, res.rhs, res.ratio):
                rows.append((order, k, u.name, tau, lo, hi, ratio))
            consts.append(res.constant)
            drift.append(abs(fine.constant / res.constant - 1))
        constants[str(order)] = {"epsilon": eps, "per_field": consts, "max": max(consts)}
        stability[str(order)] = max(drift)
    summary = {"experiment": "carleman-sweep", "taus": list(taus), "constants": constants,
               "quadrature_drift": stability}
    return {"carleman.csv": (("order", "field_index", "field", "tau", "lhs", "rhs", "ratio"), rows)}, summary


def _solver_fields(cfg: ExperimentConfig, threads: int = 1):
    if not cfg.uc_lab.solver_outputs:
        return []
    dom = make_domain(cfg.domain)
    mat = make_material(cfg.material)
    disc = cfg.discretization
    p, n_el = (disc.p, disc.n_el) if disc is not None else (5, 8)
    out = []
    for label in cfg.uc_lab.solver_outputs:
        expr = exact_solution_expr(mat) if label == "exact" else label
        space = build_space(dom, p, n_el)
        res = solve(assemble(space, mat, synthesize(expr, mat, dom), threads=threads))
        out.append(SplineField(space, res.coefs, name=f"solve[{label}]"))
    return out


def run_uc_lab(cfg: ExperimentConfig, threads: int = 1):
    u = cfg.uc_lab
    R1 = u.R1
    fields = [field_from_name(f) for f in u.fields] + _solver_fields(cfg, threads)
    radii = doubling_radii(R1)
    r = u.r if u.r is not None else R1 / 2**10
    s = u.s if u.s is not None else R1 / 2**9
    rows = []
    fsum = {}
    for f in fields:
        prof = ball_profile(f, radii + [r, s])
        rep = doubling_report(prof, R1)
        ts = three_sphere_report(prof, r, s, R1)
        for rad, l2 in zip(prof.radii, prof.l2):
            ratio = rep.ratios.get(float(rad))
            rows.append((f.name, rad, l2, "" if ratio is None else ratio, rep.N, rep.certified_C))
        fsum[f.name] = {"N": rep.N, "certified_C": rep.certified_C,
                        "doubling_ratios": sorted(set(round(v, 9) for v in rep.ratios.values())),
                        "three_sphere": {"theta": ts.theta, "C_min": ts.C_min, "lhs": ts.lhs}}
        if isinstance(f, AnalyticField):
            fsum[f.name]["caccioppoli"] = list(caccioppoli_report(f, u.caccioppoli_r))
    pairs = identity_battery(cfg.seed)
    ident = {str(k): max(identity_check(k, a, b).relative_gap for a, b in pairs) for k in (1, 2, 3)}
    red = [reduction_check(a, b0=b0, b1=b1) for a, b0, b1 in reduction_battery(cfg.seed)]
    b0 = 1 + X1**2 - X1 * X2 / 2
    b1 = 2 + X2 / 3 + X1 * X2
    summary = {
        "experiment": "uc-lab",
        "R1": R1,
        "fields": fsum,
        "identity_relative_gaps": ident,
        "reduction_relative_gap": max(x.relative_gap for x in red),
        "fifth_order_symbolic_residual": str(fifth_order_symbolic(b0, b1)),
    }
    cols = ("field", "r", "l2", "doubling_ratio", "N", "C_cert")
    return {"uc_profile.csv": (cols, rows)}, summary
