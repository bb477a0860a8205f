"""Boundary data (shear force, bending moment, high-order moment) on arclength.

Synthesis from a manufactured deflection ``u*`` evaluates the three boundary
operators

* ``Mnh_hat = -Mh_abc n_a n_b n_c``
* ``Mn_hat  = X_nn + 2 (Y_nt)_s - K Y_tt``
* ``Vhat    = -(X_ab,a n_b + (X_nt + 2 K Y_nt)_s + (Y_tt)_ss)``

with ``X = M + div Mh`` and ``Y_ab = Mh_abc n_c``; arclength derivatives are
spectral on uniform samples of the periodic boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .errors import InsufficientSmoothness
from .fields import X1, X2, AnalyticField, _lambdify
from .geometry import Domain, MappedDomain
from .material import MaterialField


def fourier_derivative(values: np.ndarray, period: float, order: int = 1) -> np.ndarray:
    """Spectral derivative of uniformly sampled periodic data along the last axis."""
    n = values.shape[-1]
    k = np.fft.rfftfreq(n, d=period / n) * 2 * np.pi
    coef = np.fft.rfft(values, axis=-1) * (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        coef[..., -1] = 0.0
    return np.fft.irfft(coef, n=n, axis=-1)


def fourier_interpolate(values: np.ndarray, period: float, s) -> np.ndarray:
    """Trigonometric interpolant of uniform samples ``values[..., n]`` evaluated at ``s``."""
    n = values.shape[-1]
    coef = np.fft.rfft(values, axis=-1) / n
    k = np.arange(coef.shape[-1])
    weight = np.full(k.shape, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    s = np.atleast_1d(np.asarray(s, float))
    phase = np.exp(2j * np.pi * np.outer(s, k) / period)
    return np.real((coef * weight) @ phase.T)


@dataclass(frozen=True)
class NeumannData:
    """Boundary data triple as uniform arclength samples or analytic callables of ``s``."""

    perimeter: float
    s: np.ndarray | None = None
    Vhat: np.ndarray | None = None
    Mn_hat: np.ndarray | None = None
    Mnh_hat: np.ndarray | None = None
    funcs: tuple | None = None
    interior_residual: float = 0.0

    @classmethod
    def from_samples(cls, perimeter, Vhat, Mn_hat, Mnh_hat, **kwargs):
        Vhat = np.asarray(Vhat, float)
        n = Vhat.size
        s = np.arange(n) * perimeter / n
        return cls(float(perimeter), s, Vhat, np.asarray(Mn_hat, float), np.asarray(Mnh_hat, float), **kwargs)

    @classmethod
    def from_functions(cls, perimeter, Vhat, Mn_hat, Mnh_hat):
        def lift(f):
            return f if callable(f) else (lambda s, c=float(f): np.full(np.shape(s), c))

        return cls(float(perimeter), funcs=(lift(Vhat), lift(Mn_hat), lift(Mnh_hat)))

    @classmethod
    def zeros(cls, perimeter):
        return cls.from_functions(perimeter, 0.0, 0.0, 0.0)

    @property
    def sampled(self) -> bool:
        return self.funcs is None

    def evaluate(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = np.asarray(s, float)
        if self.funcs is not None:
            return tuple(np.asarray(f(s), float) * np.ones_like(s) for f in self.funcs)
        stacked = np.stack([self.Vhat, self.Mn_hat, self.Mnh_hat])
        out = fourier_interpolate(stacked, self.perimeter, s.ravel())
        return tuple(o.reshape(s.shape) for o in out)

    def samples(self, n: int | None = None):
        """Uniform samples ``(s, V, Mn, Mnh)``; the stored ones when available."""
        if self.sampled and (n is None or n == self.s.size):
            return self.s, self.Vhat, self.Mn_hat, self.Mnh_hat
        n = n or 1024
        s = np.arange(n) * self.perimeter / n
        return (s, *self.evaluate(s))

    def scaled(self, factor: float) -> "NeumannData":
        if self.sampled:
            return NeumannData(self.perimeter, self.s, factor * self.Vhat, factor * self.Mn_hat,
                               factor * self.Mnh_hat, interior_residual=factor * self.interior_residual)
        return NeumannData.from_functions(self.perimeter, *[(lambda s, f=f: factor * f(s)) for f in self.funcs])

    def is_zero(self) -> bool:
        _, V, Mn, Mnh = self.samples()
        return not (np.any(V) or np.any(Mn) or np.any(Mnh))

    # -- CSV -------------------------------------------------------------------
    def to_csv(self, path, header: str | None = None, n: int | None = None) -> None:
        s, V, Mn, Mnh = self.samples(n)
        with open(path, "w") as fh:
            if header:
                fh.write(header.rstrip("\n") + "\n")
            fh.write(f"# perimeter={self.perimeter:.17g}\n")
            fh.write("s,Vhat,Mn_hat,Mnh_hat\n")
            for row in zip(s, V, Mn, Mnh):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "NeumannData":
        perimeter = None
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    if line.startswith("# perimeter="):
                        perimeter = float(line.split("=", 1)[1])
                    continue
                if line.startswith("s,"):
                    continue
                rows.append([float(v) for v in line.split(",")])
        data = np.array(rows)
        s = data[:, 0]
        if perimeter is None:
            perimeter = s.size * (s[1] - s[0])
        if not np.allclose(s, np.arange(s.size) * perimeter / s.size, rtol=0, atol=1e-12 * perimeter):
            raise ValueError("CSV boundary data must be uniformly sampled in arclength starting at s = 0")
        return cls(perimeter, s, data[:, 1], data[:, 2], data[:, 3])


@dataclass(frozen=True)
class CompatibilityReport:
    residuals: tuple[float, float, float]
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(abs(r) for r in self.residuals) <= self.tol

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


def compatibility_check(data: NeumannData, dom: Domain, rtol: float = 1e-8, n: int | None = None) -> CompatibilityReport:
    """Force and moment balance ``closed-int V``, ``closed-int (V x_a + Mn n_a)``.

    Uses the trapezoidal rule on uniform arclength samples, which is spectrally
    accurate for smooth periodic data.
    """
    s, V, Mn, _ = data.samples(n)
    fr = dom.frame(s)
    h = data.perimeter / s.size
    r0 = h * np.sum(V)
    r1 = h * np.sum(V * fr.point[:, 0] + Mn * fr.n[:, 0])
    r2 = h * np.sum(V * fr.point[:, 1] + Mn * fr.n[:, 1])
    L = data.perimeter
    scale = max(np.max(np.abs(V)) * L, np.max(np.abs(Mn)) * L)
    return CompatibilityReport((float(r0), float(r1), float(r2)), float(scale), float(rtol * scale))


# -- synthesis ---------------------------------------------------------------------


def couple_exprs(u: sp.Expr, mat: MaterialField):
    """Symbolic ``M_ab``, ``Mh_abc``, ``X_ab = M_ab + Mh_abc,c`` and ``X_ab,a``."""
    c = mat.coefficient_exprs()
    xs = (X1, X2)
    H = [[sp.diff(u, xs[a], xs[b]) for b in range(2)] for a in range(2)]
    lap = H[0][0] + H[1][1]
    B, nu = c["B"], c["nu"]
    k1 = 2 * c["a2"] + 5 * c["a1"]
    k2 = c["a0"] - c["a1"] - c["a2"]
    delta = [[1, 0], [0, 1]]
    M = [[-(B * (1 - nu) + k1) * H[a][b] - (B * nu + k2) * lap * delta[a][b] for b in range(2)] for a in range(2)]
    T = [[[sp.diff(u, xs[i], xs[j], xs[k]) for k in range(2)] for j in range(2)] for i in range(2)]
    tr = [T[0][0][k] + T[1][1][k] for k in range(2)]
    b0, b1 = c["b0"], c["b1"]
    Mh = [[[(b0 - 3 * b1) / 3 * (delta[i][j] * tr[k] + delta[i][k] * tr[j] + delta[j][k] * tr[i]) + 5 * b1 * T[i][j][k]
            for k in range(2)] for j in range(2)] for i in range(2)]
    X = [[M[a][b] + sum(sp.diff(Mh[a][b][g], xs[g]) for g in range(2)) for b in range(2)] for a in range(2)]
    divX = [sum(sp.diff(X[a][b], xs[a]) for a in range(2)) for b in range(2)]
    return M, Mh, X, divX


def _field_expr(u_star):
    if isinstance(u_star, AnalyticField):
        if u_star.support is not None:
            raise InsufficientSmoothness("synthesis needs a field given by one expression near the boundary")
        return u_star.expr
    if isinstance(u_star, (sp.Expr, str, int, float)):
        return AnalyticField(u_star).expr
    raise InsufficientSmoothness("synthesis needs fifth derivatives; give the field as an analytic expression")


def synthesize(u_star, mat: MaterialField, dom: Domain, n: int = 1024) -> NeumannData:
    """Neumann data for which ``u_star`` is the weak solution (up to affines)."""
    if isinstance(dom, MappedDomain):
        raise InsufficientSmoothness("mapped domains have boundary corners; synthesis needs a C^{2,1} boundary")
    u = _field_expr(u_star)
    M, Mh, X, divX = couple_exprs(u, mat)
    s = np.arange(n) * dom.perimeter / n
    fr = dom.frame(s)
    x1, x2 = fr.point[:, 0], fr.point[:, 1]

    def ev(expr):
        return np.asarray(_lambdify(sp.sympify(expr))(x1, x2), float) * np.ones_like(x1)

    Xv = np.array([[ev(X[a][b]) for b in range(2)] for a in range(2)])
    Mhv = np.array([[[ev(Mh[i][j][k]) for k in range(2)] for j in range(2)] for i in range(2)])
    dXv = np.array([ev(divX[b]) for b in range(2)])
    nrm, tau, K = fr.n.T, fr.tau.T, fr.curvature
    Y = np.einsum("abcm,cm->abm", Mhv, nrm)
    Ynn = np.einsum("abm,am,bm->m", Y, nrm, nrm)
    Ynt = np.einsum("abm,am,bm->m", Y, nrm, tau)
    Ytt = np.einsum("abm,am,bm->m", Y, tau, tau)
    Xnn = np.einsum("abm,am,bm->m", Xv, nrm, nrm)
    Xnt = np.einsum("abm,am,bm->m", Xv, nrm, tau)
    L = dom.perimeter
    Mnh_hat = -Ynn
    Mn_hat = Xnn + 2 * fourier_derivative(Ynt, L) - K * Ytt
    Vhat = -(np.einsum("bm,bm->m", dXv, nrm) + fourier_derivative(Xnt + 2 * K * Ynt, L)
             + fourier_derivative(Ytt, L, 2))
    interior = sum(sp.diff(divX[b], (X1, X2)[b]) for b in range(2))
    resid = float(np.max(np.abs(ev(interior)))) if interior != 0 else 0.0
    return NeumannData(L, s, Vhat, Mn_hat, Mnh_hat, interior_residual=resid)


def equilibrium_residual(u_star, mat: MaterialField, dom: Domain, n: int = 41) -> float:
    """Max of ``|(M_ab + Mh_abc,c),ab|`` on a grid inside ``dom``; zero for exact solutions."""
    u = _field_expr(u_star)
    _, _, _, divX = couple_exprs(u, mat)
    expr = sp.simplify(sum(sp.diff(divX[b], (X1, X2)[b]) for b in range(2)))
    if expr == 0:
        return 0.0
    x0, x1, y0, y1 = dom.bbox
    g1, g2 = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n), indexing="ij")
    inside = dom.contains(g1, g2) if hasattr(dom, "contains") else np.ones_like(g1, bool)
    return float(np.max(np.abs(_lambdify(expr)(g1[inside], g2[inside]))))


def load_functional(data: NeumannData, frame, weights, w, grad_w, hess_w) -> float:
    """``-closed-int (V w + Mn n.grad w + Mnh nn:D^2 w)`` on a boundary quadrature rule.

    ``grad_w`` has shape ``(m, 2)`` and ``hess_w`` ``(m, 2, 2)``.
    """
    V, Mn, Mnh = data.evaluate(frame.s)
    wn = np.einsum("ma,ma->m", grad_w, frame.n)
    wnn = np.einsum("ma,mab,mb->m", frame.n, hess_w, frame.n)
    return float(-np.sum(weights * (V * w + Mn * wn + Mnh * wnn)))
