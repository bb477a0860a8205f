"""Unique-continuation laboratory.

Numerical measurements around the Carleman estimates for the Laplacian and
its second and third powers, the integration-by-parts identities behind them,
the reduction of the sixth-order plate operator to ``(b0 + 2 b1) Lap^3 u`` plus
lower order, and the doubling / three-sphere / Caccioppoli inequalities on
balls centred at the origin.

Weights ``rho^(c - 2 tau)`` span hundreds of orders of magnitude for large
``tau``; every weighted integral is accumulated in log space.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb

import numpy as np
import sympy as sp
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from .errors import (DegenerateDenominator, OriginSingular, OutOfRange, RadiusOrdering, RadiusOutOfDomain,
                     SupportViolation)
from .fields import (X1, X2, AnalyticField, AnnularBump, grad_lap_power_norm2, harmonic_polynomial,
                     lap_derivative, tensor_norm2)
from .material import IsotropicCoefficients, MaterialField, eval_tensors

K_BAR = 8


# -- weight -------------------------------------------------------------------------------


@dataclass(frozen=True)
class CarlemanWeight:
    """``rho(x) = phi_eps(|x|)`` with ``phi_eps(s) = s / (1 + s^eps)^(1/eps)``."""

    epsilon: float = 0.5

    def __post_init__(self):
        if not 0 < self.epsilon <= 0.5:
            raise ValueError("epsilon must lie in (0, 1/2]")

    def phi(self, s) -> np.ndarray:
        s = np.asarray(s, float)
        e = self.epsilon
        return s / (1 + s**e) ** (1 / e)

    def log_phi(self, s) -> np.ndarray:
        s = np.asarray(s, float)
        e = self.epsilon
        with np.errstate(divide="ignore"):
            return np.log(s) - np.log1p(s**e) / e

    def expr(self) -> sp.Expr:
        e = sp.nsimplify(self.epsilon)
        r = sp.sqrt(X1**2 + X2**2)
        return r / (1 + r**e) ** (1 / e)


def weight_eval(w: CarlemanWeight, x, power: float = 1.0) -> np.ndarray:
    """``rho(x)^power`` for points ``x`` (last axis of size 2) with ``|x| <= 1``."""
    x = np.asarray(x, float)
    r = np.hypot(x[..., 0], x[..., 1])
    if np.any(r > 1 + 1e-15):
        raise OutOfRange("the weight is defined on the closed unit ball")
    if power < 0 and np.any(r == 0):
        raise OriginSingular("negative power of rho requested at the origin")
    if power == 0:
        return np.ones_like(r)
    return w.phi(r) ** power


# -- polar quadrature ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarRule:
    """Gauss panels in ``r`` times the trapezoidal rule in ``theta`` on an annulus."""

    points: np.ndarray
    weights: np.ndarray
    radius: np.ndarray

    @classmethod
    def annulus(cls, inner: float, outer: float, panels: int = 24, order: int = 16, n_theta: int = 64):
        xg, wg = leggauss(order)
        edges = np.linspace(inner, outer, panels + 1)
        lo, hi = edges[:-1], edges[1:]
        r = (lo[:, None] + 0.5 * (hi - lo)[:, None] * (xg + 1)).ravel()
        wr = (0.5 * (hi - lo)[:, None] * wg).ravel() * r
        th = np.arange(n_theta) * 2 * np.pi / n_theta
        R, T = np.meshgrid(r, th, indexing="ij")
        W = np.outer(wr, np.full(n_theta, 2 * np.pi / n_theta))
        pts = np.stack([R * np.cos(T), R * np.sin(T)], -1).reshape(-1, 2)
        return cls(pts, W.ravel(), R.ravel())


def _rule(support, refine: int = 1, panels: int = 24, order: int = 16, n_theta: int = 64):
    return PolarRule.annulus(support[0], support[1], panels * refine, order, n_theta * refine)


def _derivs(u, rule: PolarRule, order: int):
    return u.derivatives(rule.points[:, 0], rule.points[:, 1], order)


def _log_integral(log_w: np.ndarray, f: np.ndarray, quad_w: np.ndarray) -> float:
    """``log int w f`` with ``f >= 0`` given ``log w``."""
    mask = (f > 0) & (quad_w > 0)
    if not mask.any():
        return -np.inf
    return float(logsumexp(log_w[mask] + np.log(f[mask]) + np.log(quad_w[mask])))


# -- support checks --------------------------------------------------------------------------


def field_support(u, probe_radius: float = 1.0, n: int = 400) -> tuple[float, float]:
    """Declared support annulus, or one estimated by radial sampling."""
    sup = getattr(u, "support", None)
    if sup is not None:
        return float(sup[0]), float(sup[1])
    r = np.linspace(0, probe_radius, n + 1)
    th = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    R, T = np.meshgrid(r, th, indexing="ij")
    vals = np.abs(u(R * np.cos(T), R * np.sin(T))).max(axis=1)
    nz = np.flatnonzero(vals > 1e-14 * max(vals.max(), 1e-300))
    if nz.size == 0:
        return 0.0, 0.0
    return float(r[max(nz[0] - 1, 0)]), float(r[min(nz[-1] + 1, n)])


def _check_support(u, R1: float, inner_min: float = 0.0):
    a, b = field_support(u, probe_radius=max(1.0, 2 * R1))
    if a <= inner_min or a <= 0:
        raise SupportViolation(f"field support reaches radius {a:.4g}; it must stay away from "
                               f"{'the origin' if inner_min == 0 else f'B_{inner_min:.4g}'}")
    if b > R1 * (1 + 1e-12):
        raise SupportViolation(f"field support extends to radius {b:.4g} beyond R1 = {R1:.4g}")
    return a, b


# -- Carleman sweeps ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    order: int
    epsilon: float
    taus: np.ndarray
    log_lhs: np.ndarray
    log_rhs: np.ndarray
    doubling_r: float | None = None

    @property
    def lhs(self) -> np.ndarray:
        return np.exp(self.log_lhs)

    @property
    def rhs(self) -> np.ndarray:
        return np.exp(self.log_rhs)

    @property
    def ratio(self) -> np.ndarray:
        return np.exp(self.log_rhs - self.log_lhs)

    @property
    def constant(self) -> float:
        """Empirical constant ``sup_tau rhs / lhs``."""
        return float(np.max(self.ratio))


def _carleman_terms(order: int, D, tau: float, eps: float, r_doub):
    """``(lhs_term, [rhs_terms])`` as ``(power c, tau factor, integrand)`` with weight ``rho^(c - 2 tau)``."""
    if order == 1:
        lhs = (4.0, 1.0, lap_derivative(D, 1) ** 2)
        rhs = [(2 * k + eps, tau ** (3 - 2 * k), tensor_norm2(D[k])) for k in range(2)]
        if r_doub is not None:
            rhs.append((-1.0, tau**2 * r_doub, D[0][0] ** 2))
    elif order == 2:
        lhs = (8.0, 1.0, lap_derivative(D, 2) ** 2)
        rhs = [(2 * k + 2 * eps, tau ** (6 - 2 * k), tensor_norm2(D[k])) for k in range(4)]
    elif order == 3:
        lhs = (4.0, 1.0, lap_derivative(D, 3) ** 2)
        rhs = [(2 + eps, tau, grad_lap_power_norm2(D, 2))]
        rhs += [(2 * k + 5 * eps - 8, tau ** (9 - 2 * k), tensor_norm2(D[k])) for k in range(5)]
        if r_doub is not None:
            rhs.append((-11.0, tau**6 * r_doub**3, D[0][0] ** 2))
    else:
        raise ValueError("order must be 1, 2 or 3")
    return lhs, rhs


def carleman_sweep(order: int, u, w: CarlemanWeight, taus, R1: float = 0.5, doubling_r: float | None = None,
                   refine: int = 1) -> SweepResult:
    """Both sides of the Carleman estimate of the given order for each ``tau``.

    ``lhs`` is the operator side without the constant, ``rhs`` the weighted
    derivative sum; the ratio ``rhs / lhs`` bounds the constant from below.
    With ``doubling_r`` the interior-weight term of the doubling variant is
    added (orders 1 and 3) and the support must avoid ``B_{r/4}``.
    """
    if order == 3 and w.epsilon > 0.2 + 1e-15:
        raise ValueError("the third-order estimate needs epsilon <= 1/5")
    if doubling_r is not None and order == 2:
        raise ValueError("no doubling variant for the second-order estimate")
    if doubling_r is not None and not 0 < doubling_r < R1:
        raise ValueError("doubling radius must lie in (0, R1)")
    support = _check_support(u, R1 if order == 3 else min(R1, 1.0),
                             inner_min=0.0 if doubling_r is None else doubling_r / 4)
    rule = _rule(support, refine)
    D = _derivs(u, rule, 2 * order)
    log_rho = w.log_phi(rule.radius)
    taus = np.asarray(taus, float)
    log_lhs, log_rhs = [], []
    for tau in taus:
        (cl, fl, gl), rhs = _carleman_terms(order, D, tau, w.epsilon, doubling_r)
        log_lhs.append(np.log(fl) + _log_integral((cl - 2 * tau) * log_rho, gl, rule.weights))
        parts = [np.log(f) + _log_integral((c - 2 * tau) * log_rho, g, rule.weights) for c, f, g in rhs]
        log_rhs.append(float(logsumexp(parts)))
    return SweepResult(order, w.epsilon, taus, np.array(log_lhs), np.array(log_rhs), doubling_r)


def sweep_taus(tau_bar: float = 8.0, count: int = 9) -> np.ndarray:
    """Geometric grid on ``[tau_bar, 4 tau_bar]``."""
    return tau_bar * 4.0 ** (np.arange(count) / (count - 1))


def carleman_battery(seed: int = 0, R1: float = 0.5) -> list[AnnularBump]:
    """Five compactly supported test fields in ``B_R1 \\ {0}`` with six continuous derivatives."""
    rng = np.random.default_rng(seed)
    fields = []
    annuli = [(0.2, 0.4), (0.1, 0.45), (0.05, 0.3), (0.25, 0.5), (0.15, 0.35)]
    angular = ["1", "x1", "x1**2 - x2**2", None, None]
    for (a, b), ang in zip(annuli, angular):
        if ang is None:
            c = rng.integers(-3, 4, size=6)
            ang = f"{c[0]} + {c[1]}*x1 + {c[2]}*x2 + {c[3]}*x1**2 + {c[4]}*x1*x2 + {c[5]}*x2**3"
            if not np.any(c):
                ang = "1"
        fields.append(AnnularBump(a * 2 * R1, b * 2 * R1, ang))
    return fields


# -- identities --------------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResult:
    which: int
    lhs: float
    rhs: float
    scale: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative_gap(self) -> float:
        return self.gap / self.scale if self.scale > 0 else self.gap


def _hess(Dk):
    return np.array([[Dk[0], Dk[1]], [Dk[1], Dk[2]]])


def identity_check(which: int, u, zeta, refine: int = 1) -> IdentityResult:
    """Both sides of the weighted integration-by-parts identity ``which`` (1, 2 or 3).

    1. ``int z u Lap u = -int (z |Du|^2 + (Du . Dz) u)``
    2. ``int z |D^2 u|^2 = int (-D^2z Du . Du + Lap z |Du|^2 + z (Lap u)^2)``
    3. ``int z |D^3 u|^2 = -int z Lap u Lap^2 u
       + int (-tr(D^2u D^2z D^2u) + Lap z |D^2u|^2 + 1/2 Lap z (Lap u)^2)``
    """
    if not isinstance(zeta, (AnalyticField, AnnularBump)):
        zeta = AnalyticField(zeta)
    support = field_support(u)
    rule = _rule(support, refine)
    x1, x2 = rule.points[:, 0], rule.points[:, 1]
    D = u.derivatives(x1, x2, 4)
    Z = zeta.derivatives(x1, x2, 2)
    z = Z[0][0]
    lapz = Z[2][0] + Z[2][2]
    w = rule.weights
    grad_u = D[1]
    if which == 1:
        terms_l = [z * D[0][0] * lap_derivative(D, 1)]
        terms_r = [-z * tensor_norm2(D[1]), -(grad_u[0] * Z[1][0] + grad_u[1] * Z[1][1]) * D[0][0]]
    elif which == 2:
        Hz = _hess(Z[2])
        quad = np.einsum("abm,am,bm->m", Hz, grad_u, grad_u)
        terms_l = [z * tensor_norm2(D[2])]
        terms_r = [-quad, lapz * tensor_norm2(D[1]), z * lap_derivative(D, 1) ** 2]
    elif which == 3:
        Hu = _hess(D[2])
        Hz = _hess(Z[2])
        tr = np.einsum("abm,bcm,cam->m", Hu, Hz, Hu)
        lapu = lap_derivative(D, 1)
        terms_l = [z * tensor_norm2(D[3])]
        terms_r = [-z * lapu * lap_derivative(D, 2), -tr, lapz * tensor_norm2(D[2]), 0.5 * lapz * lapu**2]
    else:
        raise ValueError("identity index must be 1, 2 or 3")
    lhs = float(sum(w @ t for t in terms_l))
    rhs = float(sum(w @ t for t in terms_r))
    scale = float(sum(abs(w @ t) for t in terms_l + terms_r))
    return IdentityResult(which, lhs, rhs, scale)


def identity_battery(seed: int = 0, count: int = 20) -> list[tuple[AnnularBump, AnalyticField]]:
    """Seeded ``(u, zeta)`` pairs: bumps with random angular factors against weight-like ``zeta``."""
    rng = np.random.default_rng(seed)
    pairs = []
    for n in range(count):
        a = float(rng.uniform(0.05, 0.3))
        b = float(a + rng.uniform(0.15, 0.5))
        b = min(b, 0.95)
        c = rng.integers(-2, 3, size=4)
        ang = f"1 + ({c[0]})*x1 + ({c[1]})*x2 + ({c[2]})*x1*x2 + ({c[3]})*x2**2"
        u = AnnularBump(a, b, ang)
        kind = n % 4
        if kind == 0:
            zeta = CarlemanWeight(0.5).expr() ** -3
        elif kind == 1:
            eps = [0.2, 0.25, 0.5][n % 3]
            tau = int(rng.integers(2, 7))
            zeta = CarlemanWeight(eps).expr() ** (-2 * tau)
        elif kind == 2:
            zeta = sp.exp(sp.Rational(int(rng.integers(1, 4)), 2) * X1 - X2**2)
        else:
            zeta = 1 + X1**2 + sp.Rational(int(rng.integers(1, 5)), 3) * X1 * X2**3
        pairs.append((u, AnalyticField(zeta)))
    return pairs


# -- sixth-order reduction ------------------------------------------------------------------------


def _partial(D, i: int, j: int):
    """``d1^i d2^j`` from graded derivatives."""
    return D[i + j][j]


def _leibniz(fD, gfun, a: int, b: int):
    """``d1^a d2^b (f g)`` with ``f`` graded and ``g`` given by ``gfun(i, j)``."""
    out = 0.0
    for i in range(a + 1):
        for j in range(b + 1):
            out = out + comb(a, i) * comb(b, j) * _partial(fD, i, j) * gfun(a - i, b - j)
    return out


def _lin(*pairs):
    """Graded derivatives of a linear combination of graded-derivative lists."""
    return [sum(c * D[k] for c, D in pairs) for k in range(len(pairs[0][1]))]


def _frob(A, B, k):
    return sum(comb(k, j) * A[k][j] * B[j] for j in range(k + 1))


@dataclass(frozen=True)
class ReductionResult:
    h_expansion: np.ndarray
    h_regrouped: np.ndarray
    h_tensor: np.ndarray
    fifth_order: np.ndarray
    diffineq_M: float | None

    @property
    def gap(self) -> float:
        return float(max(np.max(np.abs(self.h_expansion - self.h_regrouped)),
                         np.max(np.abs(self.h_expansion - self.h_tensor))))

    @property
    def relative_gap(self) -> float:
        scale = max(np.max(np.abs(self.h_tensor)), 1e-300)
        return self.gap / scale


def _coef_fields(mat: MaterialField | None, b0, b1):
    if mat is not None:
        c = mat.coefficient_exprs()
        b0 = c["b0"] if b0 is None else b0
        b1 = c["b1"] if b1 is None else b1
    if b0 is None or b1 is None:
        raise ValueError("give a material or explicit b0, b1")
    return AnalyticField(b0), AnalyticField(b1)


def _default_points(n: int = 9, radius: float = 0.9):
    g = np.linspace(-radius, radius, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    keep = X**2 + Y**2 <= radius**2
    return X[keep], Y[keep]


def reduction_check(u, mat: MaterialField | None = None, b0=None, b1=None, points=None,
                    q9_fraction: float = 0.0) -> ReductionResult:
    """``h(u) = Mh_abc,abc`` three ways plus the differential-inequality constant.

    (a) differentiating the component forms ``Mh_111 = (b0+2b1)(Lap u),1 - 5 b1 u,122``,
        ``3 Mh_112 = (b0+12b1)(Lap u),2 - 15 b1 u,222`` (and their mirrors);
    (b) ``(b0+2b1) Lap^3 u + (3b0+6b1),a (Lap^2 u),a`` plus the remainder with
        second and third derivatives of the coefficients;
    (c) Leibniz over the six-index tensor ``Q`` built from ``b0, b1``.
    """
    fb0, fb1 = _coef_fields(mat, b0, b1)
    x1, x2 = points if points is not None else _default_points()
    x1 = np.asarray(x1, float).ravel()
    x2 = np.asarray(x2, float).ravel()
    D = u.derivatives(x1, x2, 6)
    B0 = fb0.derivatives(x1, x2, 3)
    B1 = fb1.derivatives(x1, x2, 3)

    def du(i, j):
        return _partial(D, i, j)

    # (a) component expansion
    f_a = _lin((1, B0), (2, B1))          # b0 + 2 b1
    f_b = _lin((1, B0), (12, B1))         # b0 + 12 b1
    g111 = lambda i, j: du(i + 3, j) + du(i + 1, j + 2)   # (Lap u),1
    g222 = lambda i, j: du(i + 2, j + 1) + du(i, j + 3)   # (Lap u),2
    m111 = lambda a, b: _leibniz(f_a, g111, a, b) - 5 * _leibniz(B1, lambda i, j: du(i + 1, j + 2), a, b)
    m222 = lambda a, b: _leibniz(f_a, g222, a, b) - 5 * _leibniz(B1, lambda i, j: du(i + 2, j + 1), a, b)
    m112 = lambda a, b: (_leibniz(f_b, g222, a, b) - 15 * _leibniz(B1, lambda i, j: du(i, j + 3), a, b)) / 3
    m122 = lambda a, b: (_leibniz(f_b, g111, a, b) - 15 * _leibniz(B1, lambda i, j: du(i + 3, j), a, b)) / 3
    h_a = m111(3, 0) + 3 * m112(2, 1) + 3 * m122(1, 2) + m222(0, 3)

    # (b) regrouped
    c1 = _lin((1 / 3, B0), (-1.0, B1))
    lap3 = lap_derivative(D, 3)
    g5 = _lin((3, B0), (6, B1))
    fifth = g5[1][0] * lap_derivative(D, 2, 1, 0) + g5[1][1] * lap_derivative(D, 2, 0, 1)
    lapc1 = c1[2][0] + c1[2][2]
    hess_lapu = [lap_derivative(D, 1, 2 - j, j) for j in range(3)]
    grad_lapc1 = [c1[3][0] + c1[3][2], c1[3][1] + c1[3][3]]
    rem = (3 * lapc1 * lap_derivative(D, 2) + 6 * _frob(c1, hess_lapu, 2) + 15 * _frob(B1, hess_lapu, 2)
           + 3 * (grad_lapc1[0] * lap_derivative(D, 1, 1, 0) + grad_lapc1[1] * lap_derivative(D, 1, 0, 1))
           + 5 * _frob(B1, D[3], 3))
    h_b = (f_a[0][0]) * lap3 + fifth + rem

    # (c) Leibniz over the Q tensor: d_abc (Q_abcijk u_ijk)
    def q_of(k, j):
        b0v, b1v = B0[k][j], B1[k][j]
        q9 = q9_fraction * 5 * b1v / 4
        coef = IsotropicCoefficients(E=0 * b0v, nu=0 * b0v, B=0 * b0v, a0=0 * b0v, a1=0 * b0v, a2=0 * b0v,
                                     b0=b0v, b1=b1v, Q8=5 * b1v / 2 - 2 * q9, Q9=q9, t=1.0, l=1.0)
        return np.asarray(eval_tensors(coef).Q)

    Qcache = {}

    def Qd(i, j):
        if (i, j) not in Qcache:
            Qcache[(i, j)] = q_of(i + j, j)
        return Qcache[(i, j)]

    h_c = np.zeros_like(x1)
    for a, b, c in product(range(2), repeat=3):
        n2 = a + b + c
        n1 = 3 - n2
        for i, j, k in product(range(2), repeat=3):
            m2 = i + j + k
            m1 = 3 - m2
            # d1^n1 d2^n2 (Q_abcijk u_ijk)
            for s1 in range(n1 + 1):
                for s2 in range(n2 + 1):
                    Q = Qd(s1, s2)[:, a, b, c, i, j, k] if Qd(s1, s2).ndim == 7 else Qd(s1, s2)[a, b, c, i, j, k]
                    h_c += comb(n1, s1) * comb(n2, s2) * Q * du(m1 + n1 - s1, m2 + n2 - s2)

    den = np.sqrt(grad_lap_power_norm2(D, 2)) + sum(np.sqrt(tensor_norm2(D[k])) for k in range(5))
    ok = den > 1e-12 * max(np.max(den), 1e-300)
    M = float(np.max(np.abs(lap3[ok]) / den[ok])) if ok.any() else None
    return ReductionResult(np.asarray(h_a), np.asarray(h_b), h_c, np.asarray(fifth), M)


def fifth_order_symbolic(b0, b1) -> sp.Expr:
    """Fifth- and sixth-order part of ``h(u) - (b0+2b1) Lap^3 u - (3b0+6b1),a (Lap^2 u),a``
    for a generic ``u``; identically zero when the regrouping is right."""
    b0 = AnalyticField(b0).expr
    b1 = AnalyticField(b1).expr
    U = sp.Function("u")(X1, X2)
    xs = (X1, X2)
    T = {idx: sp.diff(U, *[xs[i] for i in idx]) for idx in product(range(2), repeat=3)}
    tr = [T[(0, 0, k)] + T[(1, 1, k)] for k in range(2)]
    c1 = (b0 - 3 * b1) / 3
    delta = lambda p, q: 1 if p == q else 0
    h = 0
    for a, b, c in product(range(2), repeat=3):
        Mh = c1 * (delta(a, b) * tr[c] + delta(a, c) * tr[b] + delta(b, c) * tr[a]) + 5 * b1 * T[(a, b, c)]
        h += sp.diff(Mh, xs[a], xs[b], xs[c])

    def lap(f):
        return sp.diff(f, X1, 2) + sp.diff(f, X2, 2)

    lap2 = lap(lap(U))
    target = (b0 + 2 * b1) * lap(lap2) + sum(sp.diff(3 * b0 + 6 * b1, x) * sp.diff(lap2, x) for x in xs)
    diff = sp.expand(h - target)
    high = [d for d in diff.atoms(sp.Derivative) if sum(c for _, c in d.variable_count) >= 5]
    syms = sp.symbols(f"d0:{len(high)}")
    sub = diff.subs(dict(zip(high, syms)))
    return sp.simplify(sum(sp.diff(sub, s) * s for s in syms))


def random_polynomial(rng: np.random.Generator, degree: int, scale: float = 1.0) -> sp.Expr:
    terms = [X1 ** (d - j) * X2**j for d in range(degree + 1) for j in range(d + 1)]
    coef = rng.integers(-4, 5, size=len(terms))
    return sp.nsimplify(scale) * sum(int(c) * t for c, t in zip(coef, terms))


def reduction_battery(seed: int = 0, count: int = 10):
    """Seeded triples ``(u, b0, b1)``: degree-6 ``u`` and degree-2 positive-on-the-ball coefficients."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        u = random_polynomial(rng, 6)
        b0 = 4 + random_polynomial(rng, 2, sp.Rational(1, 8))
        b1 = 2 + random_polynomial(rng, 2, sp.Rational(1, 8))
        out.append((AnalyticField(u), b0, b1))
    return out


# -- balls ---------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class BallProfile:
    radii: np.ndarray
    l2: np.ndarray
    name: str = ""

    def at(self, r: float) -> float:
        idx = np.flatnonzero(np.isclose(self.radii, r, rtol=1e-12, atol=0))
        if idx.size == 0:
            raise KeyError(f"radius {r} not in profile")
        return float(self.l2[idx[0]])


def _domain_inradius(u) -> float | None:
    space = getattr(u, "space", None)
    if space is None:
        return None
    dom = space.domain
    s = np.linspace(0, dom.perimeter, 2048, endpoint=False)
    return float(np.min(np.hypot(*dom.frame(s).point.T)))


def ball_l2(u, r: float, panels: int = 8, order: int = 12, n_theta: int = 48) -> float:
    xg, wg = leggauss(order)
    edges = np.linspace(0, r, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    rr = (lo[:, None] + 0.5 * (hi - lo)[:, None] * (xg + 1)).ravel()
    wr = (0.5 * (hi - lo)[:, None] * wg).ravel() * rr
    th = np.arange(n_theta) * 2 * np.pi / n_theta
    R, T = np.meshgrid(rr, th, indexing="ij")
    vals = u(R * np.cos(T), R * np.sin(T))
    return float(np.sum(wr[:, None] * vals**2) * 2 * np.pi / n_theta)


def ball_profile(u, radii, panels: int = 8, order: int = 12, n_theta: int = 48) -> BallProfile:
    """``int_{B_r} u^2`` for each radius by polar Gauss x trapezoid quadrature.

    For spline fields the radial panels are not aligned with element edges;
    the defaults resolve piecewise polynomials of degree <= 8 to ~1e-10.
    """
    radii = np.asarray(sorted(set(float(r) for r in radii)))
    if np.any(radii <= 0):
        raise RadiusOutOfDomain("radii must be positive")
    inr = _domain_inradius(u)
    if inr is not None and radii.max() > inr * (1 + 1e-12):
        raise RadiusOutOfDomain(f"ball of radius {radii.max():.4g} leaves the domain (inradius {inr:.4g})")
    l2 = np.array([ball_l2(u, r, panels, order, n_theta) for r in radii])
    return BallProfile(radii, l2, getattr(u, "name", ""))


def doubling_radii(R1: float = 0.5, count: int = 6) -> list[float]:
    """Radii needed by the doubling and three-sphere reports."""
    test = [R1 / 2 ** (8 + j) * 0.75 for j in range(count)]
    return [R1, R1 / 2**7] + test + [2 * r for r in test] + [R1 / 2**8, R1 / 2**9, R1 / 2**10, R1 / 2**11]


@dataclass(frozen=True)
class DoublingReport:
    N: float
    ratios: dict
    certified_C: float
    k_bar: int = K_BAR


def doubling_report(profile: BallProfile, R1: float, floor: float = 1e-300) -> DoublingReport:
    """``N = l2(R1) / l2(R1/2^7)`` and the smallest ``C`` with ``l2(2r) <= C N^8 l2(r)``."""
    outer = profile.at(R1)
    inner = profile.at(R1 / 2**7)
    if inner <= max(floor, 1e-30 * outer):
        raise DegenerateDenominator("the field vanishes on B_{R1/2^7} to working precision")
    N = outer / inner
    ratios = {}
    for r, v in zip(profile.radii, profile.l2):
        if r < R1 / 2**8 * (1 - 1e-12) and np.any(np.isclose(profile.radii, 2 * r, rtol=1e-12, atol=0)):
            if v <= floor:
                raise DegenerateDenominator(f"l2({r:.4g}) vanishes")
            ratios[float(r)] = profile.at(2 * r) / v
    if not ratios:
        raise ValueError("profile has no radius pair (r, 2r) with r < R1/2^8")
    C = max(ratios.values()) / N**K_BAR
    return DoublingReport(float(N), ratios, float(C))


def three_sphere_theta(s: float, r: float, k_bar: int = K_BAR) -> float:
    return 1.0 / (1.0 + 2 * k_bar * np.log2(s / r))


@dataclass(frozen=True)
class ThreeSphereReport:
    lhs: float
    rhs: float
    theta: float
    C_min: float


def three_sphere_report(profile: BallProfile, r: float, s: float, R1: float, C: float | None = None) -> ThreeSphereReport:
    """``l2(s) <= (C l2(R1))^(1-theta) l2(r)^theta`` with ``theta = 1/(1 + 16 log2(s/r))``.

    ``C_min`` is the smallest admissible constant; ``rhs`` uses ``C`` (default ``C_min``).
    """
    if 2 * r > s * (1 + 1e-12):
        raise RadiusOrdering("three-sphere inequality needs 2 r <= s")
    if s > R1 / 2**8 * (1 + 1e-12):
        raise RadiusOrdering("three-sphere inequality needs s <= R1 / 2^8")
    if r <= 0:
        raise RadiusOrdering("radius must be positive")
    theta = three_sphere_theta(s, r)
    ls, lr, lR = profile.at(s), profile.at(r), profile.at(R1)
    if lr <= 0 or lR <= 0:
        raise DegenerateDenominator("ball integral vanishes")
    log_c = (np.log(ls) - theta * np.log(lr)) / (1 - theta) - np.log(lR)
    C_min = float(np.exp(log_c))
    Cuse = C_min if C is None else C
    rhs = float((Cuse * lR) ** (1 - theta) * lr**theta)
    return ThreeSphereReport(float(ls), rhs, float(theta), C_min)


def caccioppoli_report(u, r: float, panels: int = 8, order: int = 12, n_theta: int = 48) -> np.ndarray:
    """``||D^h u||_{L^2(B_{r/2})} r^h / ||u||_{L^2(B_r)}`` for ``h = 1..6`` (full-tensor norms)."""
    xg, wg = leggauss(order)

    def polar(rad):
        edges = np.linspace(0, rad, panels + 1)
        lo, hi = edges[:-1], edges[1:]
        rr = (lo[:, None] + 0.5 * (hi - lo)[:, None] * (xg + 1)).ravel()
        wr = (0.5 * (hi - lo)[:, None] * wg).ravel() * rr
        th = np.arange(n_theta) * 2 * np.pi / n_theta
        R, T = np.meshgrid(rr, th, indexing="ij")
        return (R * np.cos(T)).ravel(), (R * np.sin(T)).ravel(), np.repeat(wr, n_theta) * 2 * np.pi / n_theta

    x1, x2, w = polar(r)
    base = float(np.sqrt(w @ u(x1, x2) ** 2))
    x1, x2, w = polar(r / 2)
    D = u.derivatives(x1, x2, 6)
    out = np.array([np.sqrt(w @ tensor_norm2(D[h])) * r**h for h in range(1, 7)])
    if base == 0:
        raise DegenerateDenominator("field vanishes on the ball")
    return out / base


def harmonic_battery() -> list[AnalyticField]:
    """``1, x1, Re z^2, Re z^3, Re z^4``: solutions of every constant-coefficient plate equation."""
    return [AnalyticField(1, name="1"), AnalyticField("x1", name="x1")] + [
        AnalyticField(harmonic_polynomial(m), name=f"Re z^{m}") for m in (2, 3, 4)]


__all__ = [
    "CarlemanWeight", "weight_eval", "carleman_sweep", "SweepResult", "sweep_taus", "carleman_battery",
    "identity_check", "IdentityResult", "identity_battery", "reduction_check", "ReductionResult",
    "fifth_order_symbolic", "reduction_battery", "BallProfile", "ball_profile", "doubling_radii",
    "doubling_report", "DoublingReport", "three_sphere_report", "three_sphere_theta", "ThreeSphereReport",
    "caccioppoli_report", "harmonic_battery", "PolarRule", "K_BAR",
]
