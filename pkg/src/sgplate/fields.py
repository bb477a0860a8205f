"""Analytic scalar fields on the plane and helpers for graded derivative arrays.

Derivatives of order ``k`` are stored "graded": an array ``D[k]`` of shape
``(k + 1, npts)`` whose row ``j`` holds ``d^k u / dx1^(k-j) dx2^j``.  Every
field-like object in the package (analytic expressions, spline solutions)
exposes ``derivatives(x1, x2, order)`` returning ``[D[0], ..., D[order]]``.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial

import numpy as np
import sympy as sp

X1, X2 = sp.symbols("x1 x2", real=True)

_ALLOWED = {
    "x1": X1,
    "x2": X2,
    "pi": sp.pi,
    "E": sp.E,
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
    "tanh": sp.tanh,
    "Abs": sp.Abs,
}


def parse_expression(text) -> sp.Expr:
    """Parse a user expression in ``x1, x2`` with a restricted vocabulary."""
    if isinstance(text, sp.Basic):
        return text
    if isinstance(text, (int, float)):
        return sp.nsimplify(text) if float(text).is_integer() else sp.Float(text)
    from sympy.parsing.sympy_parser import parse_expr

    from sympy.core.function import AppliedUndef

    try:
        expr = parse_expr(str(text), local_dict=dict(_ALLOWED),
                          global_dict={"__builtins__": {}, **_sympy_globals()})
    except (SyntaxError, NameError, TypeError, AttributeError) as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from None

    unknown = (expr.free_symbols - {X1, X2}) | {f.func for f in expr.atoms(AppliedUndef)}
    if unknown:
        names = ", ".join(sorted(str(s) for s in unknown))
        raise ValueError(f"unknown symbols in expression {text!r}: {names}")
    return expr


@lru_cache(maxsize=1)
def _sympy_globals():
    return {"Integer": sp.Integer, "Float": sp.Float, "Rational": sp.Rational, "Symbol": sp.Symbol,
            "Function": sp.Function}


def harmonic_polynomial(m: int) -> sp.Expr:
    """Re((x1 + i x2)^m) as a real polynomial."""
    return sp.expand(sp.re(sp.expand((X1 + sp.I * X2) ** m)))


def _lambdify(expr):
    f = sp.lambdify((X1, X2), expr, modules="numpy", cse=True)
    if expr.free_symbols:
        return f
    value = float(expr)
    return lambda x1, x2: np.full(np.broadcast(x1, x2).shape, value)


class AnalyticField:
    """Scalar field given by a sympy expression in ``x1, x2``.

    ``support=(a, b)`` declares the field to vanish outside the closed annulus
    ``a <= |x| <= b``; derivatives are then zeroed there as well, so the
    expression only needs to be correct inside the annulus.
    """

    def __init__(self, expr, support: tuple[float, float] | None = None, name: str | None = None):
        self.expr = parse_expression(expr)
        self.support = support
        self.name = name or str(self.expr)
        self._sym = {(0, 0): self.expr}
        self._num = {}

    def __repr__(self):
        return f"AnalyticField({self.name!r})"

    def partial_expr(self, a: int, b: int) -> sp.Expr:
        key = (a, b)
        if key not in self._sym:
            if a > 0:
                self._sym[key] = sp.diff(self.partial_expr(a - 1, b), X1)
            else:
                self._sym[key] = sp.diff(self.partial_expr(a, b - 1), X2)
        return self._sym[key]

    def partial(self, a: int, b: int):
        key = (a, b)
        if key not in self._num:
            self._num[key] = _lambdify(self.partial_expr(a, b))
        return self._num[key]

    def _mask(self, x1, x2):
        if self.support is None:
            return None
        r = np.hypot(x1, x2)
        lo, hi = self.support
        return (r >= lo) & (r <= hi)

    def evaluate_partial(self, a: int, b: int, x1, x2) -> np.ndarray:
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        mask = self._mask(x1, x2)
        f = self.partial(a, b)
        if mask is None:
            return np.asarray(f(x1, x2), float) * np.ones_like(x1)
        out = np.zeros_like(x1)
        if mask.any():
            out[mask] = f(x1[mask], x2[mask])
        return out

    def __call__(self, x1, x2):
        return self.evaluate_partial(0, 0, x1, x2)

    def derivatives(self, x1, x2, order: int) -> list[np.ndarray]:
        return [
            np.stack([self.evaluate_partial(k - j, j, x1, x2) for j in range(k + 1)])
            for k in range(order + 1)
        ]

    def scaled(self, factor) -> "AnalyticField":
        return AnalyticField(sp.nsimplify(factor) * self.expr, self.support, name=f"{factor}*({self.name})")


def _dsquare_coeffs(a: int):
    # d^a/dx^a f(x^2) = sum_k c_k (2x)^(a-2k) f^(a-k)(x^2)
    return [(k, factorial(a) // (factorial(k) * factorial(a - 2 * k))) for k in range(a // 2 + 1)]


class AnnularBump:
    """``P(x) * ((|x|^2 - a^2)(b^2 - |x|^2))^power`` on ``a <= |x| <= b``, zero elsewhere.

    With ``power = 7`` the field is C^6 across the support boundary, which is
    enough for every sixth-order quantity computed on it.  Derivatives are
    evaluated in factored form (chain rule through ``q = |x|^2`` plus Leibniz)
    to avoid the cancellation of an expanded degree-30 polynomial.
    """

    def __init__(self, inner: float, outer: float, angular=1, power: int = 7):
        if not 0 <= inner < outer:
            raise ValueError("need 0 <= inner < outer")
        self.support = (float(inner), float(outer))
        self.power = power
        self.angular = AnalyticField(angular)
        self.name = f"bump[{inner},{outer}]*({self.angular.name})"

    def __repr__(self):
        return f"AnnularBump({self.name!r})"

    def _g(self, q, n):
        A, B = self.support[0] ** 2, self.support[1] ** 2
        p = self.power
        out = np.zeros_like(q)
        for i in range(min(n, p) + 1):
            m = n - i
            if m > p:
                continue
            left = factorial(p) / factorial(p - i) * (q - A) ** (p - i)
            right = (-1) ** m * factorial(p) / factorial(p - m) * (B - q) ** (p - m)
            out += comb(n, i) * left * right
        return out

    def _radial_partial(self, a, b, x1, x2, q):
        out = np.zeros_like(q)
        for k, ck in _dsquare_coeffs(a):
            for l, cl in _dsquare_coeffs(b):
                out += ck * cl * (2 * x1) ** (a - 2 * k) * (2 * x2) ** (b - 2 * l) * self._g(q, a - k + b - l)
        return out

    def evaluate_partial(self, a: int, b: int, x1, x2) -> np.ndarray:
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        r = np.hypot(x1, x2)
        mask = (r >= self.support[0]) & (r <= self.support[1])
        out = np.zeros_like(x1)
        if not mask.any():
            return out
        y1, y2 = x1[mask], x2[mask]
        q = y1**2 + y2**2
        acc = np.zeros_like(q)
        for i in range(a + 1):
            for j in range(b + 1):
                dp = self.angular.evaluate_partial(i, j, y1, y2)
                if not np.any(dp):
                    continue
                acc += comb(a, i) * comb(b, j) * dp * self._radial_partial(a - i, b - j, y1, y2, q)
        out[mask] = acc
        return out

    def __call__(self, x1, x2):
        return self.evaluate_partial(0, 0, x1, x2)

    def derivatives(self, x1, x2, order: int) -> list[np.ndarray]:
        # one pass: shared powers of q and shared radial/angular partials
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        r = np.hypot(x1, x2)
        mask = (r >= self.support[0]) & (r <= self.support[1])
        out = [np.zeros((k + 1,) + x1.shape) for k in range(order + 1)]
        if not mask.any():
            return out
        y1, y2 = x1[mask], x2[mask]
        q = y1**2 + y2**2
        G = [self._g(q, n) for n in range(order + 1)]
        p1 = [np.ones_like(q)] + [(2 * y1) ** e for e in range(1, order + 1)]
        p2 = [np.ones_like(q)] + [(2 * y2) ** e for e in range(1, order + 1)]
        radial = {}
        for a in range(order + 1):
            for b in range(order + 1 - a):
                acc = np.zeros_like(q)
                for k, ck in _dsquare_coeffs(a):
                    for l, cl in _dsquare_coeffs(b):
                        acc += ck * cl * p1[a - 2 * k] * p2[b - 2 * l] * G[a - k + b - l]
                radial[(a, b)] = acc
        ang = {}
        for i in range(order + 1):
            for j in range(order + 1 - i):
                v = self.angular.evaluate_partial(i, j, y1, y2)
                if np.any(v):
                    ang[(i, j)] = v
        for k in range(order + 1):
            for jj in range(k + 1):
                a, b = k - jj, jj
                acc = np.zeros_like(q)
                for (i, j), v in ang.items():
                    if i <= a and j <= b:
                        acc += comb(a, i) * comb(b, j) * v * radial[(a - i, b - j)]
                out[k][jj][mask] = acc
        return out


def annular_bump(inner: float, outer: float, angular=1, power: int = 7) -> AnnularBump:
    return AnnularBump(inner, outer, angular, power)


# -- graded derivative helpers -------------------------------------------------


def full_tensor(dk: np.ndarray) -> np.ndarray:
    """Expand a graded order-k derivative row stack into a full ``(2,)*k`` tensor."""
    k = dk.shape[0] - 1
    shape = (2,) * k + dk.shape[1:]
    out = np.empty(shape)
    for idx in np.ndindex(*((2,) * k)):
        out[idx] = dk[sum(idx)]
    return out


def tensor_norm2(dk: np.ndarray) -> np.ndarray:
    """Squared Frobenius norm of the full derivative tensor (sum over all index tuples)."""
    k = dk.shape[0] - 1
    return sum(comb(k, j) * dk[j] ** 2 for j in range(k + 1))


def multiindex_norm2(dk: np.ndarray) -> np.ndarray:
    """Squared norm summing each multi-index once."""
    return np.sum(dk**2, axis=0)


def lap_derivative(D: list[np.ndarray], m: int, a: int = 0, b: int = 0) -> np.ndarray:
    """``d1^a d2^b Laplacian^m u`` from graded derivatives."""
    order = 2 * m + a + b
    dk = D[order]
    return sum(comb(m, i) * dk[b + 2 * i] for i in range(m + 1))


def laplacian_power(D: list[np.ndarray], m: int) -> np.ndarray:
    return lap_derivative(D, m)


def grad_lap_power_norm2(D: list[np.ndarray], m: int) -> np.ndarray:
    """``|D Laplacian^m u|^2``."""
    return lap_derivative(D, m, 1, 0) ** 2 + lap_derivative(D, m, 0, 1) ** 2
