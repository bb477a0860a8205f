"""Saddle-point solve of the normalized Neumann problem and its diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .discretization import AssembledSystem, SplineSpace, _element_rules, element_derivatives, mass_matrices
from .errors import IncompatibleData, SingularSystem
from .neumann import NeumannData, compatibility_check


@dataclass(frozen=True)
class SolveResult:
    coefs: np.ndarray
    multipliers: np.ndarray
    energy: float
    h3_norm: float
    residual: dict
    stability_ratio: float | None
    method: str = "splu"
    space: SplineSpace = field(default=None, repr=False, compare=False)

    def to_record(self) -> dict:
        return {
            "energy": self.energy,
            "h3_norm": self.h3_norm,
            "multipliers": [float(v) for v in self.multipliers],
            "constraint_residual": self.residual["constraint"],
            "galerkin_residual": self.residual["galerkin"],
            "stability_ratio": self.stability_ratio,
            "method": self.method,
            "dofs": int(self.coefs.size),
        }


def _gram_cache(space: SplineSpace):
    cache = getattr(space, "_gram", None)
    if cache is None:
        cache = mass_matrices(space, 3)
        space._gram = cache
    return cache


def h3_norm_coefs(space: SplineSpace, coefs, r0: float | None = None) -> float:
    """``r0^-1 (sum_i r0^(2i) int |D^i u|^2)^(1/2)`` with the multi-index sum."""
    r0 = space.domain.r0 if r0 is None else r0
    G = _gram_cache(space)
    total = sum(r0 ** (2 * k) * float(coefs @ (G[k] @ coefs)) for k in range(4))
    return float(np.sqrt(max(total, 0.0)) / r0)


def _scaled_saddle(system: AssembledSystem):
    K = system.K
    d = K.diagonal().copy()
    small = d <= 1e-300 * max(d.max(), 1e-300)
    d[small] = 1.0
    Dinv = 1.0 / np.sqrt(d)
    Ks = sps.diags(Dinv) @ K @ sps.diags(Dinv)
    C = system.C * Dinv[None, :]
    rown = np.linalg.norm(C, axis=1)
    rown[rown == 0] = 1.0
    Cs = C / rown[:, None]
    A = sps.bmat([[Ks, sps.csr_matrix(Cs.T)], [sps.csr_matrix(Cs), None]], format="csc")
    return A, Dinv, rown


def solve(system: AssembledSystem, check_compatibility: bool = True, compat_rtol: float = 1e-8,
          permutation=None) -> SolveResult:
    """Solve ``[[K, C^T], [C, 0]] [u; lam] = [F; 0]``.

    ``permutation`` (optional) reorders the unknowns before factorization; the
    solution is returned in the original ordering.
    """
    data = system.data
    if check_compatibility and data is not None:
        rep = compatibility_check(data, system.space.domain, rtol=compat_rtol)
        if not rep.passed:
            raise IncompatibleData(f"compatibility residuals {rep.residuals} exceed {rep.tol:.3e}")
    A, Dinv, rown = _scaled_saddle(system)
    n = system.n
    rhs = np.concatenate([Dinv * system.F, np.zeros(3)])
    perm = np.arange(n + 3)
    if permutation is not None:
        perm = np.concatenate([np.asarray(permutation), n + np.arange(3)])
        A = A[perm][:, perm].tocsc()
        rhs = rhs[perm]
    method = "splu"
    try:
        lu = spla.splu(A, permc_spec="COLAMD")
        y = lu.solve(rhs)
        if not np.all(np.isfinite(y)):
            raise RuntimeError("non-finite factorization")
    except RuntimeError:
        method = "minres"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            y, info = spla.minres(A, rhs, rtol=1e-12, maxiter=20 * (n + 3))
        if info != 0 or not np.all(np.isfinite(y)):
            raise SingularSystem("saddle system is singular: kernel beyond the affine functions") from None
    out = np.empty_like(y)
    out[perm] = y
    coefs = Dinv * out[:n]
    lam = out[n:] / rown
    scale = max(np.abs(rhs).max(), 1e-300)
    if np.abs(A @ y - rhs).max() > 1e-6 * scale and method == "splu":
        raise SingularSystem("factorization residual too large: kernel beyond the affine functions")
    cres = float(np.abs(system.C @ coefs).max() / max(np.abs(system.C).max() * np.abs(coefs).max(), 1e-300))
    Fmax = np.abs(system.F).max()
    gres = float(np.abs(system.K @ coefs - system.F).max() / Fmax) if Fmax > 0 else 0.0
    energy = float(coefs @ (system.K @ coefs))
    h3 = h3_norm_coefs(system.space, coefs)
    res = SolveResult(coefs, lam, energy, h3, {"constraint": cres, "galerkin": gres}, None, method, system.space)
    ratio = stability_report(res, data, system.space.domain.r0) if data is not None else None
    return SolveResult(coefs, lam, energy, h3, res.residual, ratio, method, system.space)


def boundary_l2_norms(data: NeumannData, n: int | None = None) -> tuple[float, float, float]:
    s, V, Mn, Mnh = data.samples(n)
    h = data.perimeter / s.size
    return tuple(float(np.sqrt(h * np.sum(v**2))) for v in (V, Mn, Mnh))


def stability_report(result: SolveResult, data: NeumannData, r0: float = 1.0) -> float | None:
    """``h3_norm / (|V| + |Mn|/r0 + |Mnh|/r0^2)`` with L^2(boundary) norms; ``None`` for zero data."""
    nv, nm, nh = boundary_l2_norms(data)
    denom = nv + nm / r0 + nh / r0**2
    if denom == 0:
        return None
    return float(result.h3_norm / denom)


# -- comparisons modulo affines ---------------------------------------------------------


def _quadrature_points(space: SplineSpace, extra_order: int):
    rules = space.rules if extra_order == 0 else _element_rules(space, extra_order)
    for key, (pts, wts) in sorted(rules.items()):
        if len(pts):
            yield key, pts, wts


def field_difference(space: SplineSpace, coefs, u_star, extra_order: int = 2):
    """Derivatives (orders 0..3) of ``u_h - u_star`` and of ``u_star`` at quadrature points, with weights."""
    full = space.expand(np.asarray(coefs, float))
    diff = [[] for _ in range(4)]
    ref = [[] for _ in range(4)]
    weights, points = [], []
    for (i, j), pts, wts in _quadrature_points(space, extra_order):
        D, det = element_derivatives(space, i, j, pts, 3)
        X = space.domain.map(pts[:, 0], pts[:, 1]) if space.mapped else pts
        U = u_star.derivatives(X[:, 0], X[:, 1], 3) if u_star is not None else [np.zeros((k + 1, len(pts)))
                                                                               for k in range(4)]
        c = full[space.element_dofs(i, j)]
        for k in range(4):
            uh = D[k] @ c
            diff[k].append(uh - U[k])
            ref[k].append(np.asarray(U[k], float))
        weights.append(wts * det)
        points.append(X)
    cat = lambda parts: [np.concatenate(p, axis=-1) for p in parts]
    return cat(diff), cat(ref), np.concatenate(weights), np.concatenate(points)


def affine_projection(values: np.ndarray, points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Coefficients ``(c0, c1, c2)`` of the L^2(Omega) projection onto ``span{1, x1, x2}``."""
    A = np.stack([np.ones(len(points)), points[:, 0], points[:, 1]], 1)
    G = A.T @ (weights[:, None] * A)
    return np.linalg.solve(G, A.T @ (weights * values))


def _remove_affine(D, points, weights):
    c = affine_projection(D[0][0], points, weights)
    out = [d.copy() for d in D]
    out[0][0] -= c[0] + c[1] * points[:, 0] + c[2] * points[:, 1]
    out[1][0] -= c[1]
    out[1][1] -= c[2]
    return out


def _h3(D, weights, r0):
    total = sum(r0 ** (2 * k) * float(weights @ np.sum(D[k] ** 2, axis=0)) for k in range(4))
    return np.sqrt(total) / r0


def h3_error(space: SplineSpace, coefs, u_star, extra_order: int = 2) -> dict:
    """Relative H^3 error modulo affines and the absolute H^3 seminorm error."""
    diff, ref, w, X = field_difference(space, coefs, u_star, extra_order)
    r0 = space.domain.r0
    e = _remove_affine(diff, X, w)
    u = _remove_affine(ref, X, w)
    num = _h3(e, w, r0)
    den = _h3(u, w, r0)
    semi = float(np.sqrt(w @ np.sum(diff[3] ** 2, axis=0)))
    return {"h3_relative": float(num / den) if den > 0 else float(num), "h3_abs": float(num),
            "seminorm3": semi, "seminorm3_ref": float(np.sqrt(w @ np.sum(ref[3] ** 2, axis=0)))}


def agree_modulo_affines(space: SplineSpace, a, b) -> float:
    """Relative H^3 distance between two discrete solutions after affine projection."""
    from .discretization import SplineField

    return h3_error(space, a, SplineField(space, b), extra_order=0)["h3_relative"]
