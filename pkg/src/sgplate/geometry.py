"""Plane domains, arclength boundary frames and boundary change-of-variables.

Three domain kinds are provided:

* :class:`Disk` -- ``|x| < R`` centred at the origin;
* :class:`RoundedRectangle` -- the superellipse ``(x/A)^2k + (y/B)^2k < 1``
  (a rectangle of sides ``2A x 2B`` with C^infinity rounded corners);
* :class:`MappedDomain` -- image of a parameter rectangle under a smooth map.

Disk and rounded rectangle are handled by the immersed (fictitious-domain)
discretisation and expose the monotone-level-set helpers it needs; mapped
domains are handled by pulling the bilinear form back to the parameter
rectangle.  The boundary is oriented counterclockwise with outward normal
``n = (tau_2, -tau_1)``, so that ``tau = e3 x n``, ``dn/ds = K tau`` and
``dtau/ds = -K n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .errors import OutOfRange, SingularMap
from .fields import X1, X2, parse_expression

PHI = sp.Symbol("phi", real=True)


@dataclass(frozen=True)
class BoundaryFrame:
    """Boundary points with unit normal/tangent, curvature and arclength (arrays)."""

    point: np.ndarray
    n: np.ndarray
    tau: np.ndarray
    curvature: np.ndarray
    s: np.ndarray

    @property
    def dn_ds(self) -> np.ndarray:
        return self.curvature[..., None] * self.tau

    @property
    def dtau_ds(self) -> np.ndarray:
        return -self.curvature[..., None] * self.n


@dataclass(frozen=True)
class BoundaryRule:
    """Quadrature on the boundary: nodes, weights (arclength measure) and the frame there.

    ``params`` holds parameter-space coordinates of the nodes for mapped domains.
    """

    frame: BoundaryFrame
    weights: np.ndarray
    params: np.ndarray | None = None

    @property
    def points(self) -> np.ndarray:
        return self.frame.point


def _frame_from_derivs(d1: np.ndarray, d2: np.ndarray):
    speed = np.hypot(d1[..., 0], d1[..., 1])
    tau = d1 / speed[..., None]
    n = np.stack([tau[..., 1], -tau[..., 0]], axis=-1)
    curv = (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / speed**3
    return tau, n, curv, speed


def graph_frame(dg, d2g):
    """Tangent, outward normal and curvature for a boundary piece ``x2 = g(x1)``
    with the domain lying above the graph."""
    dg = np.asarray(dg, float)
    d2g = np.asarray(d2g, float)
    root = np.sqrt(1 + dg**2)
    tau = np.stack([1 / root, dg / root], axis=-1)
    n = np.stack([dg / root, -1 / root], axis=-1)
    curv = d2g / root**3
    return tau, n, curv


class Domain:
    """Common interface; concrete kinds override the geometry hooks."""

    kind = "abstract"
    r0: float = 1.0
    M0: float | None = None
    M1: float | None = None
    immersed = False

    @property
    def perimeter(self) -> float:
        raise NotImplementedError

    def frame(self, s, wrap: bool = False) -> BoundaryFrame:
        raise NotImplementedError

    def _check_s(self, s, wrap):
        s = np.asarray(s, float)
        L = self.perimeter
        if wrap:
            return np.mod(s, L)
        if np.any(s < 0) or np.any(s >= L * (1 + 1e-14)):
            raise OutOfRange(f"arclength outside [0, {L})")
        return np.clip(s, 0.0, L)

    def boundary_frame(self, s, wrap: bool = False) -> BoundaryFrame:
        return self.frame(s, wrap=wrap)

    def area(self, nodes: int = 4096) -> float:
        """Area by the boundary integral ``1/2 closed-int (x dy - y dx)``."""
        L = self.perimeter
        s = (np.arange(nodes) + 0.5) * L / nodes
        fr = self.frame(s)
        integrand = 0.5 * np.einsum("...i,...i->...", fr.point, fr.n)
        return float(np.sum(integrand) * L / nodes)

    def check_area_bound(self) -> tuple[bool, float]:
        """``|Omega| <= M1 r0^2``; returns (ok, |Omega| / r0^2)."""
        ratio = self.area() / self.r0**2
        return (self.M1 is None or ratio <= self.M1 * (1 + 1e-12)), ratio

    def describe(self) -> dict:
        raise NotImplementedError


class _PolarStarDomain(Domain):
    """Domain whose boundary is ``r(phi) (cos phi, sin phi)``, symmetric in both axes,
    with a level set increasing in ``|x1|`` and ``|x2|``."""

    immersed = True
    _panels = 256
    _order = 16

    def _setup_curve(self, radius_expr: sp.Expr):
        gamma = sp.Matrix([radius_expr * sp.cos(PHI), radius_expr * sp.sin(PHI)])
        derivs = [gamma]
        for _ in range(3):
            derivs.append(derivs[-1].diff(PHI))
        self._gamma = [sp.lambdify(PHI, list(d), modules="numpy", cse=True) for d in derivs]
        xg, wg = leggauss(self._order)
        edges = np.linspace(0.0, 2 * np.pi, self._panels + 1)
        h = np.diff(edges)
        nodes = edges[:-1, None] + 0.5 * h[:, None] * (xg[None, :] + 1)
        speed = self._speed(nodes)
        panel = np.sum(speed * wg[None, :], axis=1) * 0.5 * h
        self._edges = edges
        self._cum = np.concatenate([[0.0], np.cumsum(panel)])
        self._gl = (xg, wg)

    def curve(self, phi, d: int = 0) -> np.ndarray:
        phi = np.asarray(phi, float)
        out = self._gamma[d](phi)
        return np.stack([np.broadcast_to(np.asarray(c, float), phi.shape) for c in out], axis=-1)

    def _speed(self, phi):
        d1 = self.curve(phi, 1)
        return np.hypot(d1[..., 0], d1[..., 1])

    @property
    def perimeter(self) -> float:
        return float(self._cum[-1])

    def arclength(self, phi) -> np.ndarray:
        """Arclength from ``phi = 0`` (counterclockwise), for ``phi`` in ``[0, 2 pi]``."""
        phi = np.asarray(phi, float)
        idx = np.clip(np.searchsorted(self._edges, phi, side="right") - 1, 0, self._panels - 1)
        start = self._edges[idx]
        xg, wg = self._gl
        half = 0.5 * (phi - start)
        nodes = start[..., None] + half[..., None] * (xg + 1)
        part = np.sum(self._speed(nodes) * wg, axis=-1) * half
        return self._cum[idx] + part

    def angle_of_arclength(self, s) -> np.ndarray:
        s = np.asarray(s, float)
        L = self.perimeter
        phi = 2 * np.pi * s / L
        for _ in range(50):
            step = (self.arclength(phi) - s) / self._speed(phi)
            phi = phi - step
            if np.max(np.abs(step), initial=0.0) < 1e-15:
                break
        return phi

    def frame_at_angle(self, phi) -> BoundaryFrame:
        phi = np.asarray(phi, float)
        tau, n, curv, _ = _frame_from_derivs(self.curve(phi, 1), self.curve(phi, 2))
        return BoundaryFrame(self.curve(phi), n, tau, curv, self.arclength(np.mod(phi, 2 * np.pi)))

    def frame(self, s, wrap: bool = False) -> BoundaryFrame:
        s = self._check_s(s, wrap)
        phi = self.angle_of_arclength(s)
        fr = self.frame_at_angle(phi)
        return BoundaryFrame(fr.point, fr.n, fr.tau, fr.curvature, s)

    # -- immersed-discretisation hooks --------------------------------------

    def half_height(self, x) -> np.ndarray:
        raise NotImplementedError

    def half_width(self, y) -> np.ndarray:
        raise NotImplementedError

    def levelset(self, x1, x2) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x1, x2) -> np.ndarray:
        return self.levelset(x1, x2) < 0

    def box_status(self, x0, x1, y0, y1) -> int:
        """-1 if the box lies inside, +1 if outside, 0 if cut by the boundary."""
        xs_near = 0.0 if x0 <= 0 <= x1 else min(abs(x0), abs(x1))
        ys_near = 0.0 if y0 <= 0 <= y1 else min(abs(y0), abs(y1))
        xs_far = max(abs(x0), abs(x1))
        ys_far = max(abs(y0), abs(y1))
        if self.levelset(xs_far, ys_far) <= 0:
            return -1
        if self.levelset(xs_near, ys_near) >= 0:
            return 1
        return 0

    @property
    def switch_point(self) -> tuple[float, float]:
        """Boundary point in the first quadrant where the tangent slope is -1."""
        raise NotImplementedError

    def boundary_rule(self, breaks_x, breaks_y, order: int) -> BoundaryRule:
        """Gauss rule on arcs between crossings of the lines ``x = breaks_x`` and ``y = breaks_y``."""
        angles = [0.0, 2 * np.pi]
        xmax, ymax = self.bbox[1], self.bbox[3]
        for c in breaks_x:
            if abs(c) < xmax:
                h = float(self.half_height(c))
                angles += [np.arctan2(h, c), np.arctan2(-h, c)]
        for c in breaks_y:
            if abs(c) < ymax:
                w = float(self.half_width(c))
                angles += [np.arctan2(c, w), np.arctan2(c, -w)]
        angles = np.unique(np.mod(angles, 2 * np.pi))
        angles = np.unique(np.concatenate([angles, [2 * np.pi]]))
        # split long arcs so every panel is resolved by the Gauss rule
        cuts = []
        for a, b in zip(angles[:-1], angles[1:]):
            m = max(1, int(np.ceil((b - a) / (np.pi / 16))))
            cuts.append(np.linspace(a, b, m + 1)[:-1])
        cuts.append([2 * np.pi])
        edges = np.unique(np.concatenate(cuts))
        edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14])]
        xg, wg = leggauss(order)
        lo, hi = edges[:-1], edges[1:]
        phi = (lo[:, None] + 0.5 * (hi - lo)[:, None] * (xg[None, :] + 1)).ravel()
        dphi = (0.5 * (hi - lo)[:, None] * wg[None, :]).ravel()
        fr = self.frame_at_angle(phi)
        return BoundaryRule(fr, dphi * self._speed(phi))


class Disk(_PolarStarDomain):
    kind = "disk"

    def __init__(self, R: float = 1.0, r0: float | None = None, M0=None, M1=None):
        if not R > 0:
            raise ValueError("radius must be positive")
        self.R = float(R)
        self.r0 = float(r0) if r0 is not None else self.R
        self.M0, self.M1 = M0, M1
        self.bbox = (-self.R, self.R, -self.R, self.R)
        self._setup_curve(sp.nsimplify(self.R))

    @property
    def perimeter(self) -> float:
        return 2 * np.pi * self.R

    def arclength(self, phi):
        return self.R * np.asarray(phi, float)

    def angle_of_arclength(self, s):
        return np.asarray(s, float) / self.R

    def half_height(self, x):
        return np.sqrt(np.maximum(self.R**2 - np.asarray(x, float) ** 2, 0.0))

    half_width = half_height

    def levelset(self, x1, x2):
        return np.asarray(x1) ** 2 + np.asarray(x2) ** 2 - self.R**2

    @property
    def switch_point(self):
        v = self.R / np.sqrt(2.0)
        return v, v

    def describe(self):
        return {"kind": "disk", "R": self.R, "r0": self.r0}


class RoundedRectangle(_PolarStarDomain):
    """Rectangle ``[-A, A] x [-B, B]`` with corners rounded by the superellipse
    ``(x/A)^2k + (y/B)^2k = 1``; ``exponent = 2k``.

    The boundary is analytic, so boundary data synthesised from smooth fields
    carry no concentrated corner loads.
    """

    kind = "rectangle"

    def __init__(self, a: float, b: float, exponent: int = 8, r0: float | None = None, M0=None, M1=None,
                 min_corner_radius: float | None = None):
        if exponent % 2 or exponent < 2:
            raise ValueError("exponent must be an even integer >= 2")
        self.a, self.b = float(a), float(b)
        self.A, self.B = self.a / 2, self.b / 2
        self.k = exponent // 2
        self.exponent = exponent
        self.r0 = float(r0) if r0 is not None else min(self.A, self.B)
        self.M0, self.M1 = M0, M1
        self.bbox = (-self.A, self.A, -self.B, self.B)
        A, B = sp.nsimplify(self.A), sp.nsimplify(self.B)
        radius = ((sp.cos(PHI) / A) ** exponent + (sp.sin(PHI) / B) ** exponent) ** sp.Rational(-1, exponent)
        self._setup_curve(radius)
        limit = self.r0 / 10 if min_corner_radius is None else min_corner_radius
        if self.min_radius_of_curvature() < limit:
            raise ValueError(
                f"corner radius of curvature {self.min_radius_of_curvature():.4g} below {limit:.4g}; "
                "lower the exponent")

    def min_radius_of_curvature(self) -> float:
        phi = np.linspace(0, np.pi / 2, 2001)
        curv = self.frame_at_angle(phi).curvature
        return float(1 / np.max(np.abs(curv)))

    def half_height(self, x):
        x = np.asarray(x, float)
        t = np.clip(1 - np.abs(x / self.A) ** self.exponent, 0.0, None)
        return self.B * t ** (1 / self.exponent)

    def half_width(self, y):
        y = np.asarray(y, float)
        t = np.clip(1 - np.abs(y / self.B) ** self.exponent, 0.0, None)
        return self.A * t ** (1 / self.exponent)

    def levelset(self, x1, x2):
        return (np.asarray(x1) / self.A) ** self.exponent + (np.asarray(x2) / self.B) ** self.exponent - 1

    @property
    def switch_point(self):
        e, A, B = self.exponent, self.A, self.B

        def slope_plus_one(x):
            u = (x / A) ** e
            return -(B / A) * (x / A) ** (e - 1) * (1 - u) ** (1 / e - 1) + 1

        xs = brentq(slope_plus_one, 1e-12 * A, A * (1 - 1e-15), xtol=1e-15)
        return float(xs), float(self.half_height(xs))

    def describe(self):
        return {"kind": "rectangle", "a": self.a, "b": self.b, "exponent": self.exponent, "r0": self.r0}


class MappedDomain(Domain):
    """Image of the parameter rectangle ``[0, a] x [0, b]`` under ``x = map(xi)``.

    The map is given by two expressions in ``x1, x2`` (read as parameter
    coordinates).  The boundary has corners at the images of the rectangle
    corners; it is traversed counterclockwise.
    """

    kind = "mapped"
    _order = 24

    def __init__(self, a: float = 1.0, b: float = 1.0, map_exprs=("x1", "x2"), r0: float | None = None,
                 M0=None, M1=None, det_threshold: float = 1e-10):
        self.a, self.b = float(a), float(b)
        self.map_exprs = tuple(parse_expression(e) for e in map_exprs)
        self.r0 = float(r0) if r0 is not None else 0.5 * min(self.a, self.b)
        self.M0, self.M1 = M0, M1
        F = sp.Matrix(self.map_exprs)
        xs = (X1, X2)
        S = F.jacobian(xs)
        R = [[[sp.diff(F[k], xs[r], xs[s]) for s in range(2)] for r in range(2)] for k in range(2)]
        Z = [[[[sp.diff(F[k], xs[r], xs[s], xs[t]) for t in range(2)] for s in range(2)] for r in range(2)]
             for k in range(2)]
        self._fmap = [sp.lambdify(xs, e, modules="numpy", cse=True) for e in self.map_exprs]
        self._S = sp.lambdify(xs, S.tolist(), modules="numpy", cse=True)
        self._R = sp.lambdify(xs, R, modules="numpy", cse=True)
        self._Z = sp.lambdify(xs, Z, modules="numpy", cse=True)
        self.is_affine = all(sp.diff(F[k], v, w) == 0 for k in range(2) for v in xs for w in xs)
        g = np.linspace(0, 1, 33)
        p1, p2 = np.meshgrid(g * self.a, g * self.b, indexing="ij")
        det = np.linalg.det(self.jacobian(p1.ravel(), p2.ravel()))
        scale = np.mean(np.abs(det))
        if np.any(det <= det_threshold * scale):
            raise SingularMap("map Jacobian determinant not bounded away from zero (or orientation reversing)")
        self.det_threshold = det_threshold
        self._det_scale = scale
        self._setup_boundary()
        xb = self.map(*self._bnodes_param.T)
        self.bbox = (float(xb[:, 0].min()), float(xb[:, 0].max()), float(xb[:, 1].min()), float(xb[:, 1].max()))

    @staticmethod
    def _arr(values, shape):
        return np.array([[np.broadcast_to(np.asarray(v, float), shape) for v in row] for row in values])

    def map(self, xi1, xi2) -> np.ndarray:
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, float), np.asarray(xi2, float))
        return np.stack([np.broadcast_to(np.asarray(f(xi1, xi2), float), xi1.shape) for f in self._fmap], axis=-1)

    def jacobian(self, xi1, xi2) -> np.ndarray:
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, float), np.asarray(xi2, float))
        S = self._arr(self._S(xi1, xi2), xi1.shape)
        return np.moveaxis(S, (0, 1), (-2, -1))

    def map_jacobians(self, xi1, xi2):
        """First, second and third derivative arrays ``S[k,r]``, ``R[k,r,s]``, ``Z[k,r,s,t]``."""
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, float), np.asarray(xi2, float))
        shape = xi1.shape
        S = self.jacobian(xi1, xi2)
        det = np.linalg.det(S)
        if np.any(np.abs(det) < self.det_threshold * self._det_scale):
            raise SingularMap("Jacobian determinant below threshold")
        R = np.array([[[np.broadcast_to(np.asarray(v, float), shape) for v in r2] for r2 in r1]
                      for r1 in self._R(xi1, xi2)])
        Z = np.array([[[[np.broadcast_to(np.asarray(v, float), shape) for v in r3] for r3 in r2] for r2 in r1]
                      for r1 in self._Z(xi1, xi2)])
        return S, np.moveaxis(R, (0, 1, 2), (-3, -2, -1)), np.moveaxis(Z, (0, 1, 2, 3), (-4, -3, -2, -1))

    # edges: bottom (t: 0->a, xi2=0), right, top (reversed), left (reversed)
    def _edge_param(self, e, t):
        t = np.asarray(t, float)
        a, b = self.a, self.b
        if e == 0:
            return np.stack([t, np.zeros_like(t)], -1), np.array([1.0, 0.0])
        if e == 1:
            return np.stack([np.full_like(t, a), t], -1), np.array([0.0, 1.0])
        if e == 2:
            return np.stack([a - t, np.full_like(t, b)], -1), np.array([-1.0, 0.0])
        return np.stack([np.zeros_like(t), b - t], -1), np.array([0.0, -1.0])

    def _edge_length(self, e):
        return self.a if e % 2 == 0 else self.b

    def _edge_derivs(self, e, t):
        xi, d = self._edge_param(e, t)
        S, R, _ = self.map_jacobians(xi[..., 0], xi[..., 1])
        d1 = np.einsum("...kr,r->...k", S, d)
        d2 = np.einsum("...krs,r,s->...k", R, d, d)
        return xi, d1, d2

    def _setup_boundary(self):
        xg, wg = leggauss(self._order)
        self._edge_cum = [0.0]
        self._panels = []
        nodes = []
        for e in range(4):
            Le = self._edge_length(e)
            edges = np.linspace(0, Le, 65)
            lo, hi = edges[:-1], edges[1:]
            t = lo[:, None] + 0.5 * (hi - lo)[:, None] * (xg + 1)
            xi, d1, _ = self._edge_derivs(e, t)
            speed = np.hypot(d1[..., 0], d1[..., 1])
            panel = np.sum(speed * wg, axis=1) * 0.5 * (hi - lo)
            self._panels.append((edges, np.concatenate([[0.0], np.cumsum(panel)])))
            self._edge_cum.append(self._edge_cum[-1] + float(np.sum(panel)))
            nodes.append(xi.reshape(-1, 2))
        self._bnodes_param = np.concatenate(nodes)

    @property
    def perimeter(self) -> float:
        return self._edge_cum[-1]

    def area(self, nodes: int = 24) -> float:
        """``int |det S|`` over the parameter rectangle (the boundary rule is only first order at corners)."""
        x, w = leggauss(nodes)
        g1, g2 = np.meshgrid(0.5 * self.a * (x + 1), 0.5 * self.b * (x + 1), indexing="ij")
        det = np.abs(np.linalg.det(self.jacobian(g1, g2)))
        return float(0.25 * self.a * self.b * np.einsum("i,j,ij->", w, w, det))

    def _edge_arclength(self, e, t):
        edges, cum = self._panels[e]
        t = np.asarray(t, float)
        idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(edges) - 2)
        start = edges[idx]
        xg, wg = leggauss(self._order)
        half = 0.5 * (t - start)
        nodes = start[..., None] + half[..., None] * (xg + 1)
        _, d1, _ = self._edge_derivs(e, nodes)
        part = np.sum(np.hypot(d1[..., 0], d1[..., 1]) * wg, axis=-1) * half
        return cum[idx] + part

    def frame(self, s, wrap: bool = False) -> BoundaryFrame:
        s = np.atleast_1d(self._check_s(s, wrap))
        cum = np.asarray(self._edge_cum)
        edge = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, 3)
        point = np.empty(s.shape + (2,))
        n = np.empty_like(point)
        tau = np.empty_like(point)
        curv = np.empty(s.shape)
        for e in range(4):
            sel = edge == e
            if not sel.any():
                continue
            target = s[sel] - cum[e]
            Le = self._edge_length(e)
            t = target / (cum[e + 1] - cum[e]) * Le
            for _ in range(50):
                _, d1, _ = self._edge_derivs(e, t)
                step = (self._edge_arclength(e, t) - target) / np.hypot(d1[..., 0], d1[..., 1])
                t = np.clip(t - step, 0.0, Le)
                if np.max(np.abs(step)) < 1e-15:
                    break
            xi, d1, d2 = self._edge_derivs(e, t)
            ta, nn, kk, _ = _frame_from_derivs(d1, d2)
            point[sel] = self.map(xi[..., 0], xi[..., 1])
            n[sel], tau[sel], curv[sel] = nn, ta, kk
        return BoundaryFrame(point, n, tau, curv, s)

    def boundary_rule(self, breaks_1, breaks_2, order: int) -> BoundaryRule:
        """Gauss rule on the images of the parameter edges split at the parameter knots."""
        xg, wg = leggauss(order)
        frames, weights, params = [], [], []
        for e in range(4):
            Le = self._edge_length(e)
            knots = np.asarray(breaks_1 if e % 2 == 0 else breaks_2, float)
            if e >= 2:
                knots = (self.a if e == 2 else self.b) - knots
            cuts = np.unique(np.clip(np.concatenate([[0.0, Le], knots]), 0, Le))
            lo, hi = cuts[:-1], cuts[1:]
            t = (lo[:, None] + 0.5 * (hi - lo)[:, None] * (xg + 1)).ravel()
            w = (0.5 * (hi - lo)[:, None] * wg).ravel()
            xi, d1, d2 = self._edge_derivs(e, t)
            ta, nn, kk, speed = _frame_from_derivs(d1, d2)
            s = self._edge_cum[e] + self._edge_arclength(e, t)
            frames.append((self.map(xi[:, 0], xi[:, 1]), nn, ta, kk, s))
            weights.append(w * speed)
            params.append(xi)
        cat = [np.concatenate(z) for z in zip(*frames)]
        return BoundaryRule(BoundaryFrame(*cat), np.concatenate(weights), np.concatenate(params))

    def describe(self):
        return {"kind": "mapped", "a": self.a, "b": self.b, "map": [str(e) for e in self.map_exprs],
                "r0": self.r0}


def map_jacobians(dom: MappedDomain, x):
    """``(S, R, Z)`` of the domain map at parameter point(s) ``x`` (last axis of size 2)."""
    if not isinstance(dom, MappedDomain):
        raise TypeError("map_jacobians needs a mapped domain")
    x = np.asarray(x, float)
    return dom.map_jacobians(x[..., 0], x[..., 1])


def boundary_frame(dom: Domain, s, wrap: bool = False) -> BoundaryFrame:
    return dom.frame(s, wrap=wrap)


# -- boundary change of variables ------------------------------------------------


def surface_derivatives(grad: np.ndarray, hess: np.ndarray, frame: BoundaryFrame):
    """Local boundary derivatives ``(w_s, w_n, w_ss, w_sn, w_nn)`` from cartesian ones.

    ``w_ss`` and ``w_sn`` are the derivatives in the (arclength, normal shift)
    coordinates, i.e. ``w_ss = tau H tau - K w_n`` and ``w_sn = tau H n + K w_s``.
    """
    tau, n, K = frame.tau, frame.n, frame.curvature
    w_s = np.einsum("...a,...a->...", grad, tau)
    w_n = np.einsum("...a,...a->...", grad, n)
    w_ss = np.einsum("...a,...ab,...b->...", tau, hess, tau) - K * w_n
    w_sn = np.einsum("...a,...ab,...b->...", tau, hess, n) + K * w_s
    w_nn = np.einsum("...a,...ab,...b->...", n, hess, n)
    return w_s, w_n, w_ss, w_sn, w_nn


def gradient_from_local(w_s, w_n, frame: BoundaryFrame) -> np.ndarray:
    """``w_,b = w_n n_b + w_s tau_b``."""
    return w_n[..., None] * frame.n + w_s[..., None] * frame.tau


def hessian_from_local(w_s, w_n, w_ss, w_sn, w_nn, frame: BoundaryFrame, variant: str = "second") -> np.ndarray:
    """Cartesian Hessian from local derivatives.

    ``variant="second"`` carries the frame derivatives on the second index
    (``tau_a tau_b,s - n_a n_b,s`` and ``tau_a n_b,s``), ``"secondBIS"`` on the
    first; the two agree because ``tau,s`` and ``n,s`` follow the Frenet relations.
    """
    tau, n = frame.tau, frame.n
    tau_s, n_s = frame.dtau_ds, frame.dn_ds

    def outer(u, v):
        return np.einsum("...a,...b->...ab", u, v)

    H = (w_ss[..., None, None] * outer(tau, tau) + w_nn[..., None, None] * outer(n, n)
         + w_sn[..., None, None] * (outer(tau, n) + outer(n, tau)))
    if variant == "second":
        H = H + w_s[..., None, None] * (outer(tau, tau_s) - outer(n, n_s)) + w_n[..., None, None] * outer(tau, n_s)
    elif variant == "secondBIS":
        H = H + w_s[..., None, None] * (outer(tau_s, tau) - outer(n_s, n)) + w_n[..., None, None] * outer(n_s, tau)
    else:
        raise ValueError("variant must be 'second' or 'secondBIS'")
    return H


def make_domain(spec: dict) -> Domain:
    """Build a domain from a config mapping (``kind`` plus dimensions)."""
    kind = spec.get("kind")
    common = {k: spec[k] for k in ("r0", "M0", "M1") if k in spec}
    if kind == "disk":
        return Disk(R=float(spec.get("R", 1.0)), **common)
    if kind == "rectangle":
        return RoundedRectangle(float(spec["a"]), float(spec["b"]), exponent=int(spec.get("exponent", 8)), **common)
    if kind == "mapped":
        base = spec.get("base", [1.0, 1.0])
        return MappedDomain(float(base[0]), float(base[1]), tuple(spec.get("map", ("x1", "x2"))), **common)
    raise ValueError(f"unknown domain kind {kind!r}")
