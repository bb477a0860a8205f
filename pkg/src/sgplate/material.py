"""Isotropic strain-gradient plate constitutive model.

Scalars (E, nu, B, a_i, b_i) and the stiffness tensors P, P^h (fourth order)
and Q (sixth order) of a linearly elastic, isotropic, centre-symmetric
nanoplate in the simplified Toupin-Mindlin theory.  All functions accept
scalars or arrays of sample points; tensor arrays carry the point axes first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .errors import ConvexityViolation, EllipticityViolation
from .fields import X1, X2, _lambdify, parse_expression

SMOOTHNESS_CLASSES = ("C0,1", "C1,1", "C2,1")

_I2 = np.eye(2)


@dataclass(frozen=True)
class MaterialField:
    """Lame moduli as functions of position plus the geometric/length-scale constants.

    ``mu`` and ``lam`` are sympy expressions in ``x1, x2`` (numbers are
    accepted and promoted).  ``smoothness`` declares the regularity class of
    the moduli; the sixth-order reduction check requires ``"C2,1"``.
    ``q9_fraction`` selects the admissible split ``Q9 = q9_fraction * 5 b1 / 4``,
    ``Q8 = 5 b1 / 2 - 2 Q9`` of the sixth-order tensor.
    """

    mu: sp.Expr
    lam: sp.Expr
    t: float = 1.0
    l0: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    r0: float = 1.0
    smoothness: str = "C2,1"
    q9_fraction: float = 0.0
    _funcs: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mu", parse_expression(self.mu))
        object.__setattr__(self, "lam", parse_expression(self.lam))
        for name in ("t", "l0", "l1", "l2", "r0"):
            value = float(getattr(self, name))
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)
        if self.smoothness not in SMOOTHNESS_CLASSES:
            raise ValueError(f"smoothness must be one of {SMOOTHNESS_CLASSES}")

    @classmethod
    def constant(cls, mu, lam, **kwargs) -> "MaterialField":
        return cls(mu=mu, lam=lam, **kwargs)

    @property
    def l(self) -> float:
        return min(self.l0, self.l1, self.l2)

    @property
    def is_constant(self) -> bool:
        return not (self.mu.free_symbols or self.lam.free_symbols)

    def _f(self, name):
        if name not in self._funcs:
            self._funcs[name] = _lambdify(getattr(self, name))
        return self._funcs[name]

    def mu_at(self, x1, x2) -> np.ndarray:
        return np.asarray(self._f("mu")(x1, x2), float)

    def lam_at(self, x1, x2) -> np.ndarray:
        return np.asarray(self._f("lam")(x1, x2), float)

    def ellipticity_bounds(self, x1, x2) -> tuple[float, float]:
        """Sampled ``(alpha0, gamma0) = (min mu, min 2 mu + 3 lam)``."""
        mu = self.mu_at(x1, x2)
        lam = self.lam_at(x1, x2)
        return float(np.min(mu)), float(np.min(2 * mu + 3 * lam))

    def coefficient_exprs(self) -> dict[str, sp.Expr]:
        """Symbolic E, nu, B, a0, a1, a2, b0, b1 (used where derivatives of the moduli are needed)."""
        mu, lam = self.mu, self.lam
        t = sp.nsimplify(self.t)
        l0, l1, l2 = (sp.nsimplify(v) for v in (self.l0, self.l1, self.l2))
        E = mu * (2 * mu + 3 * lam) / (mu + lam)
        nu = lam / (2 * (mu + lam))
        return {
            "E": E,
            "nu": nu,
            "B": t**3 * E / (12 * (1 - nu**2)),
            "a0": 2 * mu * t * l0**2,
            "a1": sp.Rational(2, 15) * mu * t * l1**2,
            "a2": mu * t * l2**2,
            "b0": 2 * mu * t**3 / 12 * l0**2,
            "b1": sp.Rational(2, 5) * mu * t**3 / 12 * l1**2,
        }


@dataclass(frozen=True)
class IsotropicCoefficients:
    E: np.ndarray
    nu: np.ndarray
    B: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    Q8: np.ndarray
    Q9: np.ndarray
    t: float
    l: float

    def split_residual(self) -> np.ndarray:
        """``2(Q8 + 2 Q9) - 5 b1``; zero for every admissible split."""
        return 2 * (self.Q8 + 2 * self.Q9) - 5 * self.b1


def eval_coefficients(mat: MaterialField, x1=0.0, x2=0.0) -> IsotropicCoefficients:
    """Constitutive scalars at one or many points.

    Raises :class:`EllipticityViolation` where ``mu <= 0`` or ``2 mu + 3 lam <= 0``.
    """
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    mu = mat.mu_at(x1, x2) * np.ones_like(x1)
    lam = mat.lam_at(x1, x2) * np.ones_like(x1)
    if np.any(mu <= 0):
        raise EllipticityViolation(f"shear modulus not positive (min mu = {mu.min():.6g})")
    if np.any(2 * mu + 3 * lam <= 0):
        raise EllipticityViolation(f"2 mu + 3 lambda not positive (min = {(2 * mu + 3 * lam).min():.6g})")
    t = mat.t
    E = mu * (2 * mu + 3 * lam) / (mu + lam)
    nu = lam / (2 * (mu + lam))
    B = t**3 * E / (12 * (1 - nu**2))
    a0 = 2 * mu * t * mat.l0**2
    a1 = 2 / 15 * mu * t * mat.l1**2
    a2 = mu * t * mat.l2**2
    b0 = 2 * mu * t**3 / 12 * mat.l0**2
    b1 = 2 / 5 * mu * t**3 / 12 * mat.l1**2
    Q9 = mat.q9_fraction * 5 * b1 / 4
    Q8 = 5 * b1 / 2 - 2 * Q9
    return IsotropicCoefficients(E, nu, B, a0, a1, a2, b0, b1, Q8, Q9, t=t, l=mat.l)


# -- tensors -------------------------------------------------------------------

# bases of symmetric 2x2 matrices and fully symmetric 2x2x2 tensors (orthonormal)
_SYM2_BASIS = np.array([
    [[1.0, 0.0], [0.0, 0.0]],
    [[0.0, 2**-0.5], [2**-0.5, 0.0]],
    [[0.0, 0.0], [0.0, 1.0]],
])


def _sym3_basis():
    basis = []
    for j in range(4):
        T = np.zeros((2, 2, 2))
        for idx in np.ndindex(2, 2, 2):
            if sum(idx) == j:
                T[idx] = 1.0
        basis.append(T / np.linalg.norm(T))
    return np.array(basis)


_SYM3_BASIS = _sym3_basis()


def _delta_products():
    d = _I2
    P1 = np.einsum("ac,bd->abcd", d, d)
    P2 = np.einsum("ab,cd->abcd", d, d)
    q = {}
    q["ij_kn_lm"] = np.einsum("ij,kn,lm->ijklmn", d, d, d)
    q["sym_b0"] = (np.einsum("ik,jl,mn->ijklmn", d, d, d) + np.einsum("ik,jm,ln->ijklmn", d, d, d)
                   + np.einsum("jk,il,mn->ijklmn", d, d, d) + np.einsum("jk,im,ln->ijklmn", d, d, d))
    q["Q8"] = np.einsum("kn,il,jm->ijklmn", d, d, d) + np.einsum("kn,im,jl->ijklmn", d, d, d)
    q["Q9"] = (np.einsum("jn,il,km->ijklmn", d, d, d) + np.einsum("jn,im,kl->ijklmn", d, d, d)
               + np.einsum("in,jl,km->ijklmn", d, d, d) + np.einsum("in,jm,kl->ijklmn", d, d, d))
    return P1, P2, q


_P1, _P2, _QPARTS = _delta_products()


def quadratic_form_matrix(tensor: np.ndarray, order: int) -> np.ndarray:
    """Matrix of ``A, B -> T A . B`` on the orthonormal symmetric basis (point axes first)."""
    basis = _SYM2_BASIS if order == 2 else _SYM3_BASIS
    if order == 2:
        TA = np.einsum("...abcd,ncd->...nab", tensor, basis)
        return np.einsum("...nab,mab->...mn", TA, basis)
    TA = np.einsum("...ijklmn,plmn->...pijk", tensor, basis)
    return np.einsum("...pijk,qijk->...qp", TA, basis)


@dataclass(frozen=True)
class StiffnessTensors:
    """Pointwise P, P^h (shape ``(..., 2, 2, 2, 2)``) and Q (``(..., 2, 2, 2, 2, 2, 2)``)."""

    P: np.ndarray
    Ph: np.ndarray
    Q: np.ndarray
    coef: IsotropicCoefficients

    def __post_init__(self):
        for name, T, order in (("P", self.P, 2), ("Ph", self.Ph, 2), ("Q", self.Q, 3)):
            A = quadratic_form_matrix(T, order)
            asym = np.max(np.abs(A - np.swapaxes(A, -1, -2)))
            if asym > 1e-12 * max(np.max(np.abs(A)), 1e-300):
                raise ValueError(f"{name} is not symmetric on symmetric arguments (defect {asym:.3e})")
        if np.any(np.abs(self.coef.split_residual()) > 1e-12 * (np.abs(self.coef.b1) + 1e-300)):
            raise ValueError("Q8/Q9 split violates 2(Q8 + 2 Q9) = 5 b1")

    @property
    def PPh(self) -> np.ndarray:
        return self.P + self.Ph


def eval_tensors(coef: IsotropicCoefficients) -> StiffnessTensors:
    def pts(v):
        return np.asarray(v, float)[..., None, None, None, None]

    P = pts(coef.B) * ((1 - pts(coef.nu)) * _P1 + pts(coef.nu) * _P2)
    Ph = pts(2 * coef.a2 + 5 * coef.a1) * _P1 + pts(coef.a0 - coef.a1 - coef.a2) * _P2

    def pts6(v):
        return np.asarray(v, float)[(...,) + (None,) * 6]

    c = coef.b0 - 3 * coef.b1
    Q = (pts6(c / 3) * _QPARTS["ij_kn_lm"] + pts6(c / 6) * _QPARTS["sym_b0"]
         + pts6(coef.Q8) * _QPARTS["Q8"] + pts6(coef.Q9) * _QPARTS["Q9"])
    return StiffnessTensors(P=P, Ph=Ph, Q=Q, coef=coef)


def couple_M(tensors: StiffnessTensors, hessian: np.ndarray) -> np.ndarray:
    """Couple tensor ``M_ab = -(P + P^h)_abcd u_,cd``."""
    return -np.einsum("...abcd,...cd->...ab", tensors.PPh, hessian)


def couple_Mh(tensors: StiffnessTensors, third: np.ndarray) -> np.ndarray:
    """High-order couple tensor from the closed form in b0, b1.

    ``Mh_ijk = (b0 - 3 b1)/3 (d_ij T_mmk + d_ik T_mmj + d_jk T_mmi) + 5 b1 T_ijk``
    for a fully symmetric third-order ``T``.
    """
    b0 = np.asarray(tensors.coef.b0, float)[..., None, None, None]
    b1 = np.asarray(tensors.coef.b1, float)[..., None, None, None]
    trace = np.einsum("...mmk->...k", third)
    sym = (np.einsum("ij,...k->...ijk", _I2, trace) + np.einsum("ik,...j->...ijk", _I2, trace)
           + np.einsum("jk,...i->...ijk", _I2, trace))
    return (b0 - 3 * b1) / 3 * sym + 5 * b1 * third


def contract_Q(tensors: StiffnessTensors, third: np.ndarray) -> np.ndarray:
    """Direct six-index contraction ``Q_ijklmn T_lmn``."""
    return np.einsum("...ijklmn,...lmn->...ijk", tensors.Q, third)


def random_symmetric(rng: np.random.Generator, order: int, size=None) -> np.ndarray:
    """Random symmetric 2x2 (order 2) or fully symmetric 2x2x2 (order 3) tensors."""
    basis = _SYM2_BASIS if order == 2 else _SYM3_BASIS
    shape = () if size is None else (size,)
    c = rng.standard_normal(shape + (len(basis),))
    return np.tensordot(c, basis, axes=(-1, 0))


def convexity_probe(tensors: StiffnessTensors, samples: int, rng=None) -> tuple[float, float]:
    """Monte-Carlo lower estimates of the strong-convexity constants.

    Minimum over random unit symmetric ``A`` (and over all points carried by
    ``tensors``) of ``(P + P^h) A . A / (t (t^2 + l^2))`` and of
    ``Q A . A / (t^3 l^2)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(rng)
    t, l = tensors.coef.t, tensors.coef.l
    A2 = random_symmetric(rng, 2, samples)
    A2 /= np.linalg.norm(A2.reshape(samples, -1), axis=1)[:, None, None]
    A3 = random_symmetric(rng, 3, samples)
    A3 /= np.linalg.norm(A3.reshape(samples, -1), axis=1)[:, None, None, None]
    pp = tensors.PPh.reshape((-1, 2, 2, 2, 2))
    qq = tensors.Q.reshape((-1,) + (2,) * 6)
    eP = np.einsum("pabcd,scd,sab->ps", pp, A2, A2) / (t * (t**2 + l**2))
    eQ = np.einsum("pijklmn,slmn,sijk->ps", qq, A3, A3) / (t**3 * l**2)
    xi_p, xi_q = float(eP.min()), float(eQ.min())
    if xi_p <= 0 or xi_q <= 0:
        raise ConvexityViolation(f"non-positive convexity estimate (xi_P={xi_p:.3e}, xi_Q={xi_q:.3e})")
    return xi_p, xi_q


def convexity_exact(tensors: StiffnessTensors) -> tuple[float, float]:
    """Exact minima of the normalised quadratic forms (smallest eigenvalues on the symmetric basis)."""
    t, l = tensors.coef.t, tensors.coef.l
    AP = quadratic_form_matrix(tensors.PPh, 2)
    AQ = quadratic_form_matrix(tensors.Q, 3)
    AQ = 0.5 * (AQ + np.swapaxes(AQ, -1, -2))
    lp = np.linalg.eigvalsh(AP).min() / (t * (t**2 + l**2))
    lq = np.linalg.eigvalsh(AQ).min() / (t**3 * l**2)
    return float(lp), float(lq)


def material_tensors_at(mat: MaterialField, x1, x2) -> StiffnessTensors:
    return eval_tensors(eval_coefficients(mat, x1, x2))


__all__ = [
    "MaterialField",
    "IsotropicCoefficients",
    "StiffnessTensors",
    "eval_coefficients",
    "eval_tensors",
    "couple_M",
    "couple_Mh",
    "contract_Q",
    "convexity_probe",
    "convexity_exact",
    "random_symmetric",
    "material_tensors_at",
    "X1",
    "X2",
]
