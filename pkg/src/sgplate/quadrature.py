"""Gauss-Legendre rules on boxes and on boxes cut by a monotone boundary.

The cut-cell rule uses the height-function idea: inside a sub-box where the
boundary is a graph over one axis with slope at most one, integrate over the
other axis with an inner Gauss rule whose limits follow the boundary, then
integrate the (piecewise smooth) result with an outer Gauss rule split at the
points where the boundary crosses the box edges.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=64)
def gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def interval_rule(lo, hi, n: int):
    x, w = gauss(n)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    return lo[..., None] + (hi - lo)[..., None] * x, (hi - lo)[..., None] * w


def box_rule(x0, x1, y0, y1, n: int):
    """Tensor Gauss rule on ``[x0, x1] x [y0, y1]``: points ``(m, 2)`` and weights ``(m,)``."""
    px, wx = interval_rule(x0, x1, n)
    py, wy = interval_rule(y0, y1, n)
    X, Y = np.meshgrid(px, py, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1), np.outer(wx, wy).ravel()


def _split(lo, hi, extra, max_len):
    cuts = [lo, hi] + [c for c in extra if lo < c < hi]
    cuts = np.unique(cuts)
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(np.ceil((b - a) / max_len)))
        out.append(np.linspace(a, b, m + 1)[:-1])
    out.append([hi])
    edges = np.unique(np.concatenate(out))
    return edges[:-1], edges[1:]


def _height_rule(u0, u1, v0, v1, half, half_inv, n_in, n_out, swap):
    """Integrate over ``{(u, v) in box : |v| < half(u)}``; ``half_inv(|v|)`` gives the crossing ``|u|``."""
    crossings = []
    for v in (v0, v1):
        c = float(half_inv(abs(v)))
        crossings += [c, -c]
    lo, hi = _split(u0, u1, crossings, max_len=0.5 * (u1 - u0) + 1e-300)
    pu, wu = interval_rule(lo, hi, n_out)
    pu, wu = pu.ravel(), wu.ravel()
    h = half(pu)
    a = np.maximum(v0, -h)
    b = np.minimum(v1, h)
    keep = b > a
    pu, wu, a, b = pu[keep], wu[keep], a[keep], b[keep]
    pv, wv = interval_rule(a, b, n_in)
    U = np.repeat(pu, n_in)
    V = pv.ravel()
    W = (wu[:, None] * wv).ravel()
    pts = np.stack([V, U], axis=1) if swap else np.stack([U, V], axis=1)
    return pts, W


def cut_cell_rule(dom, x0, x1, y0, y1, n: int, n_out: int | None = None):
    """Quadrature for ``box ∩ Omega`` on a domain with a monotone level set.

    Exact for polynomials up to Gauss accuracy inside fully covered boxes; on
    cut boxes the inner integral is exact and the outer one converges
    spectrally in ``n_out``.
    """
    status = dom.box_status(x0, x1, y0, y1)
    if status < 0:
        return box_rule(x0, x1, y0, y1, n)
    if status > 0:
        return np.zeros((0, 2)), np.zeros(0)
    n_out = n_out or 2 * n + 4
    xs, ys = dom.switch_point
    xcuts = [c for c in (-xs, xs) if x0 < c < x1]
    ycuts = [c for c in (-ys, ys) if y0 < c < y1]
    xe = [x0, *xcuts, x1]
    ye = [y0, *ycuts, y1]
    pts, wts = [], []
    for a, b in zip(xe[:-1], xe[1:]):
        for c, d in zip(ye[:-1], ye[1:]):
            st = dom.box_status(a, b, c, d)
            if st > 0:
                continue
            if st < 0:
                p, w = box_rule(a, b, c, d, n)
            elif max(abs(a), abs(b)) <= xs * (1 + 1e-14):
                # boundary is a graph x2 = +-half_height(x1) over this column
                p, w = _height_rule(a, b, c, d, dom.half_height, dom.half_width, n, n_out, swap=False)
            else:
                p, w = _height_rule(c, d, a, b, dom.half_width, dom.half_height, n, n_out, swap=True)
            pts.append(p)
            wts.append(w)
    if not pts:
        return np.zeros((0, 2)), np.zeros(0)
    return np.concatenate(pts), np.concatenate(wts)
