"""The commuting Hamiltonians ``H_0 .. H_n`` of the rational BC_n system.

``H_l`` is a sum over signed subsets ``(J, eps)`` with ``|J| <= l`` of

    cosh(theta_{eps J}) * sqrt(V_{eps J; J^c} V_{-eps J; J^c}) * U_{J^c, l - |J|}

with the rational kernels ``v(x) = (x + i mu) / x`` and
``w(x) = (x + i nu)(x + i kappa) / x**2``. The paired product under the square
root is assembled from manifestly positive real factors; only ``U`` is summed
in complex arithmetic.

The private ``_``-prefixed evaluators accept plain sequences of floats or
:class:`~bcrsvd.dual.Dual` scalars, so gradients come for free.
"""
from __future__ import annotations

import math
from itertools import combinations, product
from typing import Sequence

import numpy as np

from . import dual as dn
from .domain import (
    Params,
    PhasePoint,
    SignedSubset,
    enumerate_signed_subsets,
    validate_phase_point,
)
from .errors import DomainError, ImaginaryResidual, InvalidArgument

#: Relative tolerance for the imaginary part of ``U_{K,p}``.
IMAG_TOL = 1e-8
#: Largest ``n`` for which the CLI evaluates the full combinatorial family.
MAX_DIRECT_N = 10


def v_kernel(x, mu):
    return (x + 1j * mu) / x


def w_kernel(x, nu, kappa):
    return (x + 1j * nu) * (x + 1j * kappa) / (x * x)


def _fsum(terms):
    if all(isinstance(t, (float, int, np.floating)) for t in terms):
        return math.fsum(terms)
    total = 0.0
    for t in terms:
        total = total + t
    return total


def _main_hamiltonian(lam, theta, params: Params):
    """Main Hamiltonian on numpy vectors or dual vectors (vectorised)."""
    mu2, nu2, ka2 = params.mu**2, params.nu**2, params.kappa**2
    n = len(lam)
    eye = np.eye(n)
    x2 = lam * lam
    wall = dn.sqrt((1.0 + nu2 / x2) * (1.0 + ka2 / x2))
    diff = lam[:, None] - lam[None, :] + eye  # diagonal shifted off zero
    summ = lam[:, None] + lam[None, :]
    pair = (1.0 + mu2 / (diff * diff)) * (1.0 + mu2 / (summ * summ))
    pair = pair * (1.0 - eye) + eye
    coef = wall * dn.prod(dn.sqrt(pair), axis=1)
    kinetic = (dn.cosh(theta) * coef).sum()
    nk = params.nu * params.kappa / params.mu**2
    potential = nk * (dn.prod(1.0 + mu2 / x2) - 1.0)
    return kinetic + potential


def eval_main_H(point: PhasePoint, params: Params) -> float:
    point = validate_phase_point(point.lam, point.theta)
    lam, theta = point.as_arrays()
    return float(_main_hamiltonian(lam, theta, params))


def _u_complex(K: Sequence[int], p: int, lam, params: Params):
    mu, nu, kappa = params.mu, params.nu, params.kappa
    total = 0.0
    for I in combinations(K, p):
        rest = [k for k in K if k not in I]
        for signs in product((1, -1), repeat=p):
            x = [s * lam[i] for s, i in zip(signs, I)]
            term = 1.0
            for a in range(p):
                term = term * w_kernel(x[a], nu, kappa)
            for a in range(p):
                for b in range(a + 1, p):
                    y = x[a] + x[b]
                    term = term * v_kernel(y, mu) * v_kernel(-y, mu)
            for a in range(p):
                for k in rest:
                    term = term * v_kernel(x[a] + lam[k], mu) * v_kernel(x[a] - lam[k], mu)
            total = total + term
    return (-1) ** p * total


def _u_real(K, p, lam, params: Params):
    u = _u_complex(K, p, lam, params)
    re, im = dn.real(u), dn.imag(u)
    re_v, im_v = float(np.real(dn.value(re))), float(np.real(dn.value(im)))
    if abs(im_v) > IMAG_TOL * (1.0 + abs(re_v)):
        raise ImaginaryResidual(f"U_(K={tuple(K)}, p={p}) has imaginary part {im_v:.3e}")
    return re


def eval_U(K: Sequence[int], p: int, lam: Sequence[float], params: Params) -> float:
    """``U_{K,p}`` at positions ``lam``; ``K`` holds 0-based particle indices."""
    K = tuple(sorted(K))
    n = len(lam)
    if p < 0 or p > len(K):
        raise InvalidArgument(f"need 0 <= p <= |K|, got p={p}, |K|={len(K)}")
    if any(k < 0 or k >= n for k in K) or len(set(K)) != len(K):
        raise InvalidArgument(f"K={K} is not a subset of range({n})")
    lam = [float(x) for x in lam]
    _check_no_collisions(lam)
    return float(_u_real(K, p, lam, params))


def _check_no_collisions(lam):
    vals = [abs(float(x)) for x in lam]
    if min(vals) == 0.0 or len(set(vals)) != len(vals):
        raise DomainError("coordinate collision: |lambda_j| must be distinct and nonzero")


def _v_pair(J: Sequence[int], signs: Sequence[int], K: Sequence[int], lam, params: Params):
    mu2, nu2, ka2 = params.mu**2, params.nu**2, params.kappa**2
    val = 1.0
    for j in J:
        x2 = lam[j] * lam[j]
        val = val * (1.0 + nu2 / x2) * (1.0 + ka2 / x2)
    for a in range(len(J)):
        for b in range(a + 1, len(J)):
            y = signs[a] * lam[J[a]] + signs[b] * lam[J[b]]
            f = 1.0 + mu2 / (y * y)
            val = val * f * f
    for j in J:
        for k in K:
            s = lam[j] + lam[k]
            d = lam[j] - lam[k]
            val = val * (1.0 + mu2 / (s * s)) * (1.0 + mu2 / (d * d))
    return val


def eval_V_pair(J_signed: SignedSubset, K: Sequence[int], lam: Sequence[float], params: Params) -> float:
    """The product ``V_{eps J; K} V_{-eps J; K}`` (nonnegative real)."""
    K = tuple(K)
    if set(J_signed.indices) & set(K):
        raise InvalidArgument("J and K must be disjoint")
    lam = [float(x) for x in lam]
    _check_no_collisions(lam)
    return float(_v_pair(J_signed.indices, J_signed.signs, K, lam, params))


def _family(lam, theta, params: Params, levels: Sequence[int]) -> dict:
    """Terms of ``H_l`` for each requested level, summed deterministically."""
    n = len(lam)
    top = max(levels)
    terms = {l: [] for l in levels}
    ucache: dict = {}
    for ss in enumerate_signed_subsets(n, top):
        m = len(ss)
        wanted = [l for l in levels if l >= m]
        if not wanted:
            continue
        K = ss.complement(n)
        weight = dn.cosh(ss.signed_sum(theta)) * dn.sqrt(_v_pair(ss.indices, ss.signs, K, lam, params))
        for l in wanted:
            key = (K, l - m)
            if key not in ucache:
                ucache[key] = _u_real(K, l - m, lam, params)
            terms[l].append(weight * ucache[key])
    return {l: (1.0 if l == 0 else _fsum(terms[l])) for l in levels}


def _hamiltonian_l(l: int, lam, theta, params: Params):
    return _family(lam, theta, params, [l])[l]


def _as_floats(point: PhasePoint):
    return [float(x) for x in point.lam], [float(x) for x in point.theta]


def eval_H_l(l: int, point: PhasePoint, params: Params) -> float:
    point = validate_phase_point(point.lam, point.theta)
    if not 0 <= l <= point.n:
        raise InvalidArgument(f"level l={l} outside 0..{point.n}")
    if l == 0:
        return 1.0
    lam, theta = _as_floats(point)
    return float(_hamiltonian_l(l, lam, theta, params))


def eval_all_H(point: PhasePoint, params: Params) -> np.ndarray:
    """``(H_0, ..., H_n)`` at ``point``.

    Cost is dominated by ``U_{K,p}`` over all ``K`` (about ``4**n`` signed
    terms) plus ``3**n`` signed subsets.
    """
    point = validate_phase_point(point.lam, point.theta)
    lam, theta = _as_floats(point)
    fam = _family(lam, theta, params, list(range(point.n + 1)))
    return np.array([float(fam[l]) for l in range(point.n + 1)])
