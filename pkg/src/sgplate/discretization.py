"""Tensor-product B-spline Galerkin space and assembly of the plate system.

Two embeddings are supported.  On the disk and the rounded rectangle the
space lives on the bounding box (immersed / fictitious domain): integrals are
taken over ``Omega`` only, with exact cut-cell quadrature, and basis
functions whose support misses ``Omega`` are dropped.  On mapped domains the
space lives on the parameter rectangle and derivatives are pushed forward
through the map.

Derivative arrays are graded (see :mod:`sgplate.fields`): order ``k`` has
``k + 1`` rows ``d1^(k-j) d2^j``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.sparse as sps

from .errors import InvalidDegree, OrderTooHigh, QuadratureUnderflow, SingularMap
from .geometry import Domain, MappedDomain
from .material import MaterialField, eval_coefficients, eval_tensors
from .quadrature import box_rule, cut_cell_rule

MAX_ORDER = 6


# -- 1D B-splines ----------------------------------------------------------------


def open_uniform_knots(a: float, b: float, p: int, n_el: int) -> np.ndarray:
    inner = np.linspace(a, b, n_el + 1)
    return np.concatenate([[a] * p, inner, [b] * p])


def find_span(knots: np.ndarray, p: int, x) -> np.ndarray:
    nb = len(knots) - p - 1
    return np.clip(np.searchsorted(knots, x, side="right") - 1, p, nb - 1)


def basis_ders(knots: np.ndarray, p: int, span, x, n: int) -> np.ndarray:
    """Nonzero basis functions and derivatives (Piegl-Tiller A2.3, vectorised).

    Returns shape ``(n + 1, p + 1, m)``: ``out[k, r]`` is the ``k``-th derivative
    of basis ``span - p + r`` at each of the ``m`` points.
    """
    x = np.atleast_1d(np.asarray(x, float))
    span = np.broadcast_to(np.asarray(span), x.shape)
    m = x.size
    nn = min(n, p)
    ndu = np.zeros((p + 1, p + 1, m))
    ndu[0, 0] = 1.0
    left = np.zeros((p + 1, m))
    right = np.zeros((p + 1, m))
    for j in range(1, p + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = np.zeros(m)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    ders = np.zeros((n + 1, p + 1, m))
    ders[0] = ndu[:, p]
    for r in range(p + 1):
        a = np.zeros((2, p + 1, m))
        a[0, 0] = 1.0
        s1, s2 = 0, 1
        for k in range(1, nn + 1):
            d = np.zeros(m)
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d = d + a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d = d + a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    for k in range(1, nn + 1):
        ders[k] *= factorial(p) / factorial(p - k)
    return ders


def greville(knots: np.ndarray, p: int) -> np.ndarray:
    nb = len(knots) - p - 1
    return np.array([knots[i + 1:i + p + 1].mean() for i in range(nb)])


# -- space -------------------------------------------------------------------------


@dataclass
class SplineSpace:
    """Tensor-product spline space of degree ``p`` on ``n_el x n_el`` uniform elements."""

    domain: Domain
    p: int
    n_el: int
    knots: tuple[np.ndarray, np.ndarray]
    box: tuple[float, float, float, float]
    quad_order: int
    active: np.ndarray = field(default=None)
    rules: list = field(default=None, repr=False)

    @property
    def mapped(self) -> bool:
        return isinstance(self.domain, MappedDomain)

    @property
    def n_basis_1d(self) -> tuple[int, int]:
        return tuple(len(k) - self.p - 1 for k in self.knots)

    @property
    def full_dim(self) -> int:
        nx, ny = self.n_basis_1d
        return nx * ny

    @property
    def dim(self) -> int:
        return int(self.active.size)

    @property
    def breaks(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.unique(k) for k in self.knots)

    def element_box(self, i: int, j: int):
        bx, by = self.breaks
        return bx[i], bx[i + 1], by[j], by[j + 1]

    def element_dofs(self, i: int, j: int) -> np.ndarray:
        ny = self.n_basis_1d[1]
        ix = i + np.arange(self.p + 1)
        iy = j + np.arange(self.p + 1)
        return (ix[:, None] * ny + iy[None, :]).ravel()

    def locate(self, xi1, xi2):
        """Element indices of parameter points (clipped to the box)."""
        bx, by = self.breaks
        i = np.clip(np.searchsorted(bx, xi1, side="right") - 1, 0, self.n_el - 1)
        j = np.clip(np.searchsorted(by, xi2, side="right") - 1, 0, self.n_el - 1)
        return i, j

    def affine_vectors(self) -> np.ndarray:
        """Coefficient vectors (rows) of ``1, x1, x2`` in the active basis.

        Exact for the immersed embedding and for affine maps; for curved maps
        the rows represent ``1, xi1, xi2`` instead.
        """
        gx = greville(self.knots[0], self.p)
        gy = greville(self.knots[1], self.p)
        GX, GY = np.meshgrid(gx, gy, indexing="ij")
        ones = np.ones(GX.size)
        if self.mapped and self.domain.is_affine:
            X = self.domain.map(GX.ravel(), GY.ravel())
            rows = [ones, X[:, 0], X[:, 1]]
        else:
            rows = [ones, GX.ravel(), GY.ravel()]
        return np.array(rows)[:, self.active]

    def interpolation_coefficients(self, func) -> np.ndarray:
        """Coefficients interpolating ``func(x1, x2)`` at Greville points (on the full box)."""
        gx = greville(self.knots[0], self.p)
        gy = greville(self.knots[1], self.p)
        Nx = _collocation(self.knots[0], self.p, gx)
        Ny = _collocation(self.knots[1], self.p, gy)
        GX, GY = np.meshgrid(gx, gy, indexing="ij")
        if self.mapped:
            X = self.domain.map(GX, GY)
            vals = func(X[..., 0], X[..., 1])
        else:
            vals = func(GX, GY)
        C = np.linalg.solve(Nx, np.linalg.solve(Ny, np.asarray(vals, float).T).T)
        return C.ravel()[self.active]

    def expand(self, coefs) -> np.ndarray:
        full = np.zeros(self.full_dim)
        full[self.active] = coefs
        return full


def _collocation(knots, p, x):
    span = find_span(knots, p, x)
    vals = basis_ders(knots, p, span, x, 0)[0]
    nb = len(knots) - p - 1
    M = np.zeros((x.size, nb))
    for r in range(p + 1):
        M[np.arange(x.size), span - p + r] = vals[r]
    return M


def build_space(dom: Domain, p: int, n_el: int, quad_order: int | None = None) -> SplineSpace:
    """Spline space of degree ``p`` (>= 3) with ``n_el`` elements per direction."""
    if int(p) != p or p < 3:
        raise InvalidDegree("degree must be an integer >= 3 for an H^3-conforming space")
    if p > 8:
        raise InvalidDegree("degrees above 8 are not supported")
    if n_el < 1:
        raise ValueError("n_el must be >= 1")
    if isinstance(dom, MappedDomain):
        box = (0.0, dom.a, 0.0, dom.b)
    else:
        box = tuple(float(v) for v in dom.bbox)
    knots = (open_uniform_knots(box[0], box[1], p, n_el), open_uniform_knots(box[2], box[3], p, n_el))
    space = SplineSpace(dom, p, n_el, knots, box, quad_order or p + 2)
    space.rules = _element_rules(space)
    used = np.zeros(space.full_dim, bool)
    for (i, j), (pts, _) in space.rules.items():
        if len(pts):
            used[space.element_dofs(i, j)] = True
    space.active = np.flatnonzero(used)
    return space


def _element_rules(space: SplineSpace, extra: int = 0) -> dict:
    n = space.quad_order + extra
    rules = {}
    for i in range(space.n_el):
        for j in range(space.n_el):
            x0, x1, y0, y1 = space.element_box(i, j)
            if space.mapped:
                rules[(i, j)] = box_rule(x0, x1, y0, y1, n)
            else:
                rules[(i, j)] = cut_cell_rule(space.domain, x0, x1, y0, y1, n, 2 * n + 4)
    return rules


# -- derivatives of the basis ----------------------------------------------------------


def _graded_param(space: SplineSpace, i: int, j: int, pts: np.ndarray, order: int) -> list[np.ndarray]:
    """Parameter-space graded derivatives of the ``(p+1)^2`` element basis functions.

    Entry ``k`` has shape ``(k + 1, m, nloc)``.
    """
    p = space.p
    dx = basis_ders(space.knots[0], p, i + p, pts[:, 0], order)  # (order+1, p+1, m)
    dy = basis_ders(space.knots[1], p, j + p, pts[:, 1], order)
    out = []
    for k in range(order + 1):
        rows = [np.einsum("am,bm->mab", dx[k - jj], dy[jj]).reshape(len(pts), -1) for jj in range(k + 1)]
        out.append(np.stack(rows))
    return out


def _full(dk):
    """Graded ``(k+1, ...)`` -> full tensor with the index axes last."""
    k = dk.shape[0] - 1
    idx = [sum(t) for t in np.ndindex(*((2,) * k))]
    full = dk[idx]
    return np.moveaxis(full.reshape((2,) * k + dk.shape[1:]), tuple(range(k)), tuple(range(-k, 0)))


def _graded(full, k):
    """Full tensor (index axes last) -> graded with rows first."""
    rows = []
    for jj in range(k + 1):
        idx = (0,) * (k - jj) + (1,) * jj
        rows.append(full[(...,) + idx])
    return np.stack(rows)


def push_forward(param: list[np.ndarray], S, R, Z) -> list[np.ndarray]:
    """Physical derivatives (orders 0..3) from parameter derivatives through the map.

    ``param[k]`` has shape ``(k+1, m, nloc)``; ``S, R, Z`` have the point axis first.
    The chain rule ``u_r = S_kr U_k``, ``u_rs = R_krs U_k + S_kr S_ls U_kl`` and its
    third-order analogue is inverted order by order.
    """
    order = len(param) - 1
    T = np.linalg.inv(S)  # T[m, r, k]: dxi_r/dx_k
    out = [param[0]]
    U1 = U2 = None
    if order >= 1:
        u1 = _full(param[1])  # (m, nloc, 2)
        U1 = np.einsum("mrk,mnr->mnk", T, u1)
        out.append(_graded(U1, 1))
    if order >= 2:
        u2 = _full(param[2])
        A2 = u2 - np.einsum("mkrs,mnk->mnrs", R, U1)
        U2 = np.einsum("mrk,msl,mnrs->mnkl", T, T, A2)
        out.append(_graded(U2, 2))
    if order >= 3:
        u3 = _full(param[3])
        A3 = (u3 - np.einsum("mkrst,mnk->mnrst", Z, U1)
              - np.einsum("mkrs,mlt,mnkl->mnrst", R, S, U2)
              - np.einsum("mkrt,mls,mnkl->mnrst", R, S, U2)
              - np.einsum("mkst,mlr,mnkl->mnrst", R, S, U2))
        U3 = np.einsum("mrk,msl,mtq,mnrst->mnklq", T, T, T, A3)
        out.append(_graded(U3, 3))
    if order > 3:
        raise OrderTooHigh("mapped domains provide physical derivatives up to order 3")
    return out


def _map_at(space, pts):
    try:
        S, R, Z = space.domain.map_jacobians(pts[:, 0], pts[:, 1])
    except SingularMap as exc:
        raise QuadratureUnderflow(f"degenerate element Jacobian: {exc}") from None
    return S, R, Z


def element_derivatives(space: SplineSpace, i: int, j: int, pts: np.ndarray, order: int):
    """Physical graded derivatives of the element basis at parameter points, plus ``|det S|``."""
    param = _graded_param(space, i, j, pts, order)
    if not space.mapped:
        return param, np.ones(len(pts))
    S, R, Z = _map_at(space, pts)
    det = np.linalg.det(S)
    if np.any(det <= 0):
        raise QuadratureUnderflow("element Jacobian determinant not positive")
    return push_forward(param, S, R, Z), np.abs(det)


# -- coefficient matrices on graded derivatives ------------------------------------------


def _grading_matrix(k: int) -> np.ndarray:
    E = np.zeros((2**k, k + 1))
    for n, t in enumerate(np.ndindex(*((2,) * k))):
        E[n, sum(t)] = 1.0
    return E


_E2 = _grading_matrix(2)
_E3 = _grading_matrix(3)


def graded_forms(mat: MaterialField, x1, x2):
    """Matrices ``G2 (m,3,3)`` and ``G3 (m,4,4)`` with
    ``(P+P^h)D^2u.D^2w = d2u^T G2 d2w`` and ``Q D^3u.D^3w = d3u^T G3 d3w`` on graded rows."""
    tens = eval_tensors(eval_coefficients(mat, x1, x2))
    m = np.size(x1)
    A = np.asarray(tens.PPh).reshape(-1, 4, 4)
    B = np.asarray(tens.Q).reshape(-1, 8, 8)
    G2 = np.einsum("ia,mij,jb->mab", _E2, A, _E2)
    G3 = np.einsum("ia,mij,jb->mab", _E3, B, _E3)
    return np.broadcast_to(G2, (m, 3, 3)), np.broadcast_to(G3, (m, 4, 4))


# -- assembled system ---------------------------------------------------------------------


@dataclass
class AssembledSystem:
    K: sps.csr_matrix
    F: np.ndarray
    C: np.ndarray
    space: SplineSpace
    material: MaterialField
    data: object = None
    affine: np.ndarray = None

    @property
    def n(self) -> int:
        return self.K.shape[0]

    def symmetry_defect(self) -> float:
        D = self.K - self.K.T
        return float(abs(D).max() / abs(self.K).max())

    def kernel_defect(self) -> float:
        """``max |K a| / max |K|`` over the affine coefficient vectors."""
        return float(np.max(np.abs(self.K @ self.affine.T)) / abs(self.K).max())


def _physical_points(space, pts):
    if space.mapped:
        return space.domain.map(pts[:, 0], pts[:, 1])
    return pts


def _element_matrix(space, mat, const_forms, i, j, pts, wts):
    D, det = element_derivatives(space, i, j, pts, 3)
    w = wts * det
    if const_forms is None:
        X = _physical_points(space, pts)
        G2, G3 = graded_forms(mat, X[:, 0], X[:, 1])
    else:
        G2, G3 = const_forms
        G2 = np.broadcast_to(G2[0], (len(w), 3, 3))
        G3 = np.broadcast_to(G3[0], (len(w), 4, 4))
    Ke = np.einsum("m,imp,mij,jmq->pq", w, D[2], G2, D[2], optimize=True)
    Ke += np.einsum("m,imp,mij,jmq->pq", w, D[3], G3, D[3], optimize=True)
    Ce = np.stack([w @ D[0][0], w @ D[1][0], w @ D[1][1]])
    return Ke, Ce


def assemble_stiffness(space: SplineSpace, mat: MaterialField, threads: int = 1, extra_order: int = 0):
    """Stiffness matrix ``K`` and constraint rows ``C`` on the active basis."""
    rules = space.rules if extra_order == 0 else _element_rules(space, extra_order)
    const_forms = graded_forms(mat, 0.0, 0.0) if mat.is_constant else None
    items = [(key, r) for key, r in sorted(rules.items()) if len(r[0])]

    def work(chunk):
        out = []
        for (i, j), (pts, wts) in chunk:
            out.append(((i, j),) + _element_matrix(space, mat, const_forms, i, j, pts, wts))
        return out

    threads = max(1, int(threads))
    if threads == 1:
        results = work(items)
    else:
        chunks = [items[k::threads] for k in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
        results = sorted((r for part in parts for r in part), key=lambda r: r[0])
    N = space.full_dim
    rows, cols, vals = [], [], []
    C = np.zeros((3, N))
    for (i, j), Ke, Ce in results:
        dofs = space.element_dofs(i, j)
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        vals.append(Ke.ravel())
        np.add.at(C, (slice(None), dofs), Ce)
    K = sps.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)).tocsr()
    K.sum_duplicates()
    act = space.active
    K = K[act][:, act].tocsr()
    K = 0.5 * (K + K.T)
    return K.tocsr(), C[:, act]


def boundary_basis(space: SplineSpace, order: int = 2, quad_order: int | None = None):
    """Boundary rule on knot-split arcs plus physical derivatives of every basis there.

    Returns ``(rule, D)`` with ``D[k]`` a sparse-like dense array ``(k+1, m, dim)``.
    """
    n = quad_order or 2 * space.p + 4
    bx, by = space.breaks
    rule = space.domain.boundary_rule(bx, by, n)
    pts = rule.params if space.mapped else rule.points
    i, j = space.locate(pts[:, 0], pts[:, 1])
    m = len(pts)
    D = [np.zeros((k + 1, m, space.full_dim)) for k in range(order + 1)]
    for key in sorted(set(zip(i.tolist(), j.tolist()))):
        sel = np.flatnonzero((i == key[0]) & (j == key[1]))
        Dk, _ = element_derivatives(space, key[0], key[1], pts[sel], order)
        dofs = space.element_dofs(*key)
        for k in range(order + 1):
            D[k][:, sel[:, None], dofs[None, :]] += Dk[k]
    return rule, [d[:, :, space.active] for d in D]


def assemble_load(space: SplineSpace, data, quad_order: int | None = None) -> np.ndarray:
    """Load vector ``F_i = -closed-int (V N_i + Mn n.grad N_i + Mnh nn:D^2 N_i)``."""
    rule, D = boundary_basis(space, 2, quad_order)
    fr = rule.frame
    V, Mn, Mnh = data.evaluate(fr.s)
    n1, n2 = fr.n[:, 0], fr.n[:, 1]
    dn = n1[:, None] * D[1][0] + n2[:, None] * D[1][1]
    dnn = (n1**2)[:, None] * D[2][0] + (2 * n1 * n2)[:, None] * D[2][1] + (n2**2)[:, None] * D[2][2]
    integrand = V[:, None] * D[0][0] + Mn[:, None] * dn + Mnh[:, None] * dnn
    return -rule.weights @ integrand


def assemble(space: SplineSpace, mat: MaterialField, data=None, threads: int = 1) -> AssembledSystem:
    """Stiffness, load and normalization constraints for the Neumann problem."""
    K, C = assemble_stiffness(space, mat, threads)
    F = assemble_load(space, data) if data is not None else np.zeros(space.dim)
    return AssembledSystem(K, F, C, space, mat, data, space.affine_vectors())


# -- evaluation -----------------------------------------------------------------------------


def invert_map(dom: MappedDomain, x: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Parameter points mapping to physical points ``x`` (Newton from a grid guess)."""
    x = np.atleast_2d(np.asarray(x, float))
    g = np.linspace(0, 1, 65)
    G1, G2 = np.meshgrid(g * dom.a, g * dom.b, indexing="ij")
    grid = np.stack([G1.ravel(), G2.ravel()], 1)
    img = dom.map(grid[:, 0], grid[:, 1])
    nearest = np.argmin(((x[:, None, :] - img[None, :, :]) ** 2).sum(-1), axis=1)
    xi = grid[nearest].copy()
    for _ in range(60):
        res = dom.map(xi[:, 0], xi[:, 1]) - x
        S = dom.jacobian(xi[:, 0], xi[:, 1])
        step = np.linalg.solve(S, res[..., None])[..., 0]
        xi -= step
        if np.max(np.abs(step), initial=0.0) < tol * max(dom.a, dom.b):
            break
    return xi


def eval_field(space: SplineSpace, coefs, x, order: int = 0) -> list[np.ndarray]:
    """Value and cartesian derivatives up to ``order`` at physical points ``x`` (shape ``(m, 2)``).

    Returns graded arrays ``[D0 (1, m), D1 (2, m), ...]``.
    """
    if order > space.p or order > MAX_ORDER:
        raise OrderTooHigh(f"derivative order {order} exceeds degree {space.p}")
    x = np.atleast_2d(np.asarray(x, float))
    full = space.expand(np.asarray(coefs, float))
    pts = invert_map(space.domain, x) if space.mapped else x
    i, j = space.locate(pts[:, 0], pts[:, 1])
    out = [np.zeros((k + 1, len(x))) for k in range(order + 1)]
    for key in sorted(set(zip(i.tolist(), j.tolist()))):
        sel = np.flatnonzero((i == key[0]) & (j == key[1]))
        Dk, _ = element_derivatives(space, key[0], key[1], pts[sel], order)
        c = full[space.element_dofs(*key)]
        for k in range(order + 1):
            out[k][:, sel] = Dk[k] @ c
    return out


class SplineField:
    """A discrete solution exposed through the common ``derivatives(x1, x2, order)`` interface."""

    def __init__(self, space: SplineSpace, coefs, name: str = "spline"):
        self.space = space
        self.coefs = np.asarray(coefs, float)
        self.name = name

    def derivatives(self, x1, x2, order: int) -> list[np.ndarray]:
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        shape = x1.shape
        D = eval_field(self.space, self.coefs, np.stack([x1.ravel(), x2.ravel()], 1), order)
        return [d.reshape((d.shape[0],) + shape) for d in D]

    def __call__(self, x1, x2):
        return self.derivatives(x1, x2, 0)[0][0]


# -- diagnostics ----------------------------------------------------------------------------


def mass_matrices(space: SplineSpace, order: int = 3) -> list[sps.csr_matrix]:
    """Gram matrices ``G_k = int sum_multiindex D^k N_i D^k N_j`` for ``k = 0..order``."""
    N = space.full_dim
    acc = [[] for _ in range(order + 1)]
    idx = []
    for (i, j), (pts, wts) in sorted(space.rules.items()):
        if not len(pts):
            continue
        D, det = element_derivatives(space, i, j, pts, order)
        w = wts * det
        dofs = space.element_dofs(i, j)
        idx.append(dofs)
        for k in range(order + 1):
            acc[k].append(np.einsum("m,imp,imq->pq", w, D[k], D[k]))
    rows = np.concatenate([np.repeat(d, d.size) for d in idx])
    cols = np.concatenate([np.tile(d, d.size) for d in idx])
    act = space.active
    out = []
    for k in range(order + 1):
        G = sps.coo_matrix((np.concatenate([a.ravel() for a in acc[k]]), (rows, cols)), shape=(N, N)).tocsr()
        out.append(G[act][:, act].tocsr())
    return out


def h3_gram(space: SplineSpace, r0: float | None = None) -> sps.csr_matrix:
    """Gram matrix of the squared norm ``r0^-2 sum_k r0^(2k) int |D^k u|^2`` (multi-index sum)."""
    r0 = space.domain.r0 if r0 is None else r0
    G = mass_matrices(space, 3)
    return sum(r0 ** (2 * k - 2) * G[k] for k in range(4)).tocsr()


def coercivity_constant(system: AssembledSystem, gram=None) -> float:
    """Smallest generalised eigenvalue of ``K`` against the H^3 Gram matrix on ``{C u = 0}``."""
    from scipy.linalg import eigh, null_space

    G = (gram if gram is not None else h3_gram(system.space)).toarray()
    Z = null_space(system.C / np.abs(system.C).max(axis=1, keepdims=True))
    Kz = Z.T @ system.K.toarray() @ Z
    Gz = Z.T @ G @ Z
    return float(eigh(Kz, Gz, eigvals_only=True)[0])


def export_coo(K, path) -> None:
    """Write a sparse matrix as ``rows cols nnz`` followed by zero-based ``i j value`` lines."""
    M = sps.coo_matrix(K)
    order = np.lexsort((M.col, M.row))
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]} {M.nnz}\n")
        for r, c, v in zip(M.row[order], M.col[order], M.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")


def read_coo(path) -> sps.csr_matrix:
    with open(path) as fh:
        rows, cols, nnz = (int(v) for v in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    return sps.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))),
                          shape=(rows, cols)).tocsr()

