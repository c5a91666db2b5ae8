"""Characteristic-polynomial invariants of the Lax matrix and action extraction.

Convention: ``det(L - x) = sum_m K_m x**(2n - m)`` with ``K_0 = 1``. Since the
size ``2n`` is even this equals ``det(x - L)``, i.e. ``K_m = (-1)**m e_m(spec L)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from . import dual as dn
from .domain import ActionVector
from .errors import (
    DegenerateAction,
    EigensolverFailure,
    PairingFailure,
    PositivityViolation,
)
from .lax import LaxMatrix

PAIRING_TOL = 1e-8
DEGENERATE_TOL = 1e-8
IMAG_TOL = 1e-10
#: Working precision (decimal digits) of the LeVerrier recursion. The power
#: sums behind it cancel badly when the spectrum spans ``e^{+-q}``; in double
#: precision coefficients lose up to ~10 digits at ``n = 6``.
LEVERRIER_DPS = 60

_to_mpc = np.vectorize(mpmath.mpc, otypes=[object])


@dataclass(frozen=True)
class CharPolyCoeffs:
    K: np.ndarray

    @property
    def n(self) -> int:
        return (len(self.K) - 1) // 2

    def palindrome_residual(self) -> float:
        """``max_m |K_{2n-m} - K_m| / (1 + |K_m|)``."""
        K = self.K
        return float(np.max(np.abs(K[::-1] - K) / (1.0 + np.abs(K))))


def monic_from_roots(roots) -> np.ndarray:
    """Coefficients of ``prod_i (x - r_i)``, highest power first.

    Built by multiplying in one linear factor at a time.
    """
    coeffs = np.zeros(len(roots) + 1, dtype=np.result_type(np.asarray(roots), float))
    coeffs[0] = 1.0
    for k, r in enumerate(roots, start=1):
        coeffs[1 : k + 1] = coeffs[1 : k + 1] - r * coeffs[0:k]
    return coeffs


def _spectrum(L: LaxMatrix) -> np.ndarray:
    try:
        ev = np.linalg.eigvalsh(L.L)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise EigensolverFailure("non-finite eigenvalues")
    return ev


def char_poly_eigen(L: LaxMatrix) -> CharPolyCoeffs:
    ev = np.sort(_spectrum(L))[::-1]
    return CharPolyCoeffs(monic_from_roots(ev))


def _lift(M):
    if isinstance(M, dn.Dual):
        return dn.Dual(_to_mpc(M.val), _to_mpc(M.der))
    return _to_mpc(np.asarray(M))


def _lower(c):
    if isinstance(c, dn.Dual):
        return dn.Dual(np.asarray(c.val, dtype=object).astype(complex), c.der.astype(complex))
    return complex(c)


def leverrier(M, dps: int = LEVERRIER_DPS):
    """Faddeev-LeVerrier coefficients ``c_0..c_N`` of ``det(x - M)``.

    Uses only products and traces, so it runs on dual matrices too. The
    recursion is carried out with ``dps`` significant digits on the (double
    precision) input and rounded back to complex128. Returns a list of complex
    or dual scalars.
    """
    N = (M.val if isinstance(M, dn.Dual) else np.asarray(M)).shape[0]
    eye = np.eye(N)
    with mpmath.workdps(dps):
        X = _lift(M)
        coeffs = [1.0]
        Mk = None
        for k in range(1, N + 1):
            Mk = eye if Mk is None else X @ Mk + coeffs[-1] * eye
            coeffs.append(-dn.trace(X @ Mk) / k)
        return [1.0 + 0j] + [_lower(c) for c in coeffs[1:]]


def char_poly_leverrier(L: LaxMatrix) -> CharPolyCoeffs:
    c = np.array([complex(x) for x in leverrier(L.L)])
    if np.any(np.abs(c.imag) > IMAG_TOL * (1.0 + np.abs(c))):
        raise EigensolverFailure("LeVerrier coefficients have large imaginary parts")
    return CharPolyCoeffs(c.real)


def extract_actions(L: LaxMatrix) -> ActionVector:
    """Actions ``q`` from the reciprocal eigenvalue pairs ``(e^{q_k}, e^{-q_k})``."""
    ev = np.sort(_spectrum(L))[::-1]
    if ev[-1] <= 0.0:
        raise PositivityViolation(f"Lax spectrum not positive: min eigenvalue {ev[-1]:.3e}")
    n = len(ev) // 2
    big, small = ev[:n], ev[::-1][:n]
    products = big * small
    if np.any(np.abs(products - 1.0) > PAIRING_TOL):
        raise PairingFailure(f"eigenvalues do not pair reciprocally: products {products}")
    q = np.log(big)
    if q[-1] < DEGENERATE_TOL:
        raise DegenerateAction(f"smallest action {q[-1]:.3e} is degenerate")
    return ActionVector(tuple(float(x) for x in q))
