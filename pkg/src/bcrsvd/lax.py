"""The Lax matrix ``L = h^{-1} A h^{-1}`` and its building blocks.

Construction is written once against the dispatching helpers in
:mod:`bcrsvd.dual`, so the same code yields either plain complex matrices or
dual matrices carrying derivatives with respect to ``(lambda, theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dual as dn
from .domain import Params, PhasePoint, validate_phase_point
from .errors import InvalidArgument, StructuralResidual

#: Max-norm tolerance for the structural relations checked in :func:`build_lax`.
STRUCTURE_TOL = 1e-10


def involution(n: int) -> np.ndarray:
    """The ``2n x 2n`` block swap ``C = [[0, 1], [1, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [eye, zero]])


@dataclass(frozen=True)
class LaxFactors:
    C: np.ndarray
    h: np.ndarray
    z: np.ndarray
    F: np.ndarray
    Lambda: np.ndarray
    A: np.ndarray

    @property
    def n(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class LaxMatrix:
    L: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0] // 2

    def to_json(self) -> list:
        """Row-major ``[re, im]`` pairs."""
        return [[[float(v.real), float(v.imag)] for v in row] for row in self.L]


def _ab(lam, kappa):
    r = dn.sqrt(lam * lam + kappa * kappa)
    s = dn.sqrt(lam + r)
    t = dn.sqrt(2.0 * lam)
    return s / t, 1j * kappa / (t * s)


def _z(lam, params: Params):
    n = len(lam)
    mu, nu = params.mu, params.nu
    entries = []
    for l in range(n):
        x = lam[l]
        val = -(1.0 + 1j * nu / x)
        for m in range(n):
            if m != l:
                val = val * (1.0 + 1j * mu / (x - lam[m])) * (1.0 + 1j * mu / (x + lam[m]))
        entries.append(val)
    return dn.stack(entries)


def _factors(lam, theta, params: Params) -> dict:
    """All factors on numpy or dual vectors; returns a plain dict."""
    n = len(lam)
    mu, nu = params.mu, params.nu
    C = involution(n)
    a, b = _ab(lam, params.kappa)
    h = dn.diag(dn.concatenate([a, a])) + C @ dn.diag(dn.concatenate([-b, b]))
    z = _z(lam, params)
    top = dn.exp(-0.5 * theta) * dn.sqrt(abs(z))
    F = dn.concatenate([top, dn.conj(z) / top])
    Lam = dn.concatenate([lam, -lam])
    num = 1j * mu * (F[:, None] * dn.conj(F)[None, :]) + 1j * (mu - 2.0 * nu) * C
    den = 1j * mu + (Lam[:, None] - Lam[None, :])
    A = num / den
    return {"C": C, "h": h, "z": z, "F": F, "Lambda": Lam, "A": A}


def _lax(lam, theta, params: Params):
    f = _factors(lam, theta, params)
    C = f["C"]
    h_inv = C @ f["h"] @ C  # exact inverse since ChC = h^{-1}
    return h_inv @ f["A"] @ h_inv


def build_factors(point: PhasePoint, params: Params) -> LaxFactors:
    point = validate_phase_point(point.lam, point.theta)
    lam, theta = point.as_arrays()
    return LaxFactors(**_factors(lam, theta, params))


def structural_residuals(factors: LaxFactors, lax: LaxMatrix) -> dict:
    """Max-norm residuals of the involution relations, Hermiticity and unit determinants."""
    if factors.n != lax.n:
        raise InvalidArgument("factors and Lax matrix have different sizes")
    C, h, A, L = factors.C, factors.h, factors.A, lax.L
    eye = np.eye(C.shape[0])

    def mx(M):
        return float(np.max(np.abs(M)))

    return {
        "ChCh_minus_I": mx(C @ h @ C @ h - eye),
        "CACA_minus_I": mx(C @ A @ C @ A - eye),
        "CLCL_minus_I": mx(C @ L @ C @ L - eye),
        "hermitian_h": mx(h - h.conj().T),
        "hermitian_A": mx(A - A.conj().T),
        "hermitian_L": mx(L - L.conj().T),
        "det_h_minus_1": float(abs(np.linalg.det(h) - 1.0)),
        "det_A_minus_1": float(abs(np.linalg.det(A) - 1.0)),
        "det_L_minus_1": float(abs(np.linalg.det(L) - 1.0)),
    }


def build_lax(point: PhasePoint, params: Params, check: bool = True) -> LaxMatrix:
    """Assemble ``L``; with ``check`` the structural relations are enforced.

    Hermiticity is judged relative to ``max|L|``; the other residuals are
    absolute. A breach raises :class:`StructuralResidual`, which indicates a
    bug rather than bad input.
    """
    point = validate_phase_point(point.lam, point.theta)
    lam, theta = point.as_arrays()
    f = _factors(lam, theta, params)
    C = f["C"]
    h_inv = C @ f["h"] @ C
    lax = LaxMatrix(h_inv @ f["A"] @ h_inv)
    if check:
        res = structural_residuals(LaxFactors(**f), lax)
        scale = float(np.max(np.abs(lax.L)))
        bad = {
            k: v
            for k, v in res.items()
            if v > STRUCTURE_TOL * (scale if k == "hermitian_L" else 1.0)
        }
        if bad:
            raise StructuralResidual(f"structural relations violated: {bad}")
    return lax
