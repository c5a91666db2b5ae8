"""Linear equivalence between the van Diejen and Lax spectral families.

Everything here lives on the action side: the pullbacks ``cM_k``, ``cH_l``,
``cK_m`` are functions of the actions ``q`` only. The transforms
:func:`vd_from_lax` and :func:`lax_from_vd` apply unchanged to phase-space
values because the pullback is invertible.

Exact coefficient matrices use Python integers; identity checks use
:class:`fractions.Fraction`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Literal, Sequence

import mpmath
import numpy as np

from .errors import IdentityFailure, InvalidArgument, LengthMismatch

Kind = Literal["vanDiejen", "laxSpectral", "auxiliaryM"]
Flavor = Literal["forwardA", "inverseB"]

#: Working precision (decimal digits) of the cosh sums behind ``cM_k``. The
#: alternating combinations in ``cH`` and ``cK`` cancel when actions are
#: small, so the sums are formed in extended precision and rounded once.
PULLBACK_DPS = 40


@lru_cache(maxsize=None)
def binom(a: int, b: int) -> int:
    """Binomial coefficient; zero outside ``0 <= b <= a`` (so ``C(-1, -1) = 0``)."""
    if b < 0 or a < 0 or b > a:
        return 0
    if b == 0 or b == a:
        return 1
    return binom(a - 1, b - 1) + binom(a - 1, b)


def _binom_int(a: int, b: int) -> int:
    # math.comb for large arguments, same zero convention
    if b < 0 or a < 0 or b > a:
        return 0
    return math.comb(a, b)


@dataclass(frozen=True)
class InvariantVector:
    kind: Kind
    values: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def level(self) -> int:
        return len(self.values) - 1


@dataclass(frozen=True)
class ExactCoeffMatrix:
    entries: tuple[tuple[int, ...], ...]
    n: int
    flavor: Flavor

    @property
    def size(self) -> int:
        return len(self.entries)

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def as_float(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)


def _check_level(k: int, n: int, what: str) -> None:
    if not 0 <= k <= n:
        raise InvalidArgument(f"{what}={k} outside 0..{n}")


def _cosh_signed_sums(q: np.ndarray, k: int):
    # extended-precision sum; call inside mpmath.workdps
    total = mpmath.mpf(0)
    qm = [mpmath.mpf(float(x)) for x in q]
    for J in combinations(range(len(q)), k):
        for signs in product((1, -1), repeat=k):
            total += mpmath.cosh(mpmath.fsum(s * qm[j] for s, j in zip(signs, J)))
    return total


def eval_M(k: int, q: Sequence[float]) -> float:
    """Sum of ``cosh(q_{eps J})`` over signed subsets of size exactly ``k``."""
    q = np.asarray(q, dtype=float)
    _check_level(k, len(q), "k")
    with mpmath.workdps(PULLBACK_DPS):
        return float(_cosh_signed_sums(q, k))


def _all_M(q: np.ndarray, top: int) -> list:
    return [_cosh_signed_sums(q, k) for k in range(top + 1)]


def eval_cH(l: int, q: Sequence[float]) -> float:
    q = np.asarray(q, dtype=float)
    n = len(q)
    _check_level(l, n, "l")
    with mpmath.workdps(PULLBACK_DPS):
        M = _all_M(q, l)
        return float(mpmath.fsum((-2) ** (l - k) * binom(n - k, l - k) * M[k] for k in range(l + 1)))


def eval_cK(m: int, q: Sequence[float]) -> float:
    q = np.asarray(q, dtype=float)
    n = len(q)
    _check_level(m, n, "m")
    with mpmath.workdps(PULLBACK_DPS):
        M = _all_M(q, m)
        s = mpmath.fsum(binom(n - (m - 2 * a), a) * M[m - 2 * a] for a in range(m // 2 + 1))
        return float((-1) ** m * s)


def elem_sym(values: Sequence[float], l: int) -> float:
    """``e_l(values)`` by the coefficient recurrence ``E_k <- E_k + x E_{k-1}``."""
    values = np.asarray(values, dtype=float)
    _check_level(l, len(values), "l")
    E = np.zeros(len(values) + 1)
    E[0] = 1.0
    for i, x in enumerate(values, start=1):
        E[1 : i + 1] = E[1 : i + 1] + x * E[0:i]
    return float(E[l])


def eval_cH_elementary(l: int, q: Sequence[float]) -> float:
    """``4**l e_l(sinh(q_k / 2)**2)``."""
    q = np.asarray(q, dtype=float)
    return 4.0**l * elem_sym(np.sinh(q / 2.0) ** 2, l)


def forward_entry(n: int, j: int, k: int) -> int:
    """Entry ``(j, k)`` of the matrix mapping Lax invariants to signed van Diejen ones.

    ``C(A, B) + C(A - 1, B - 1)`` with ``A = 2n - j - k`` and ``B = j - k``;
    this is the integer form of ``(A + B) / A * C(A, B)``, finite at ``A = 0``.
    """
    A, B = 2 * n - j - k, j - k
    return _binom_int(A, B) + _binom_int(A - 1, B - 1)


def forward_entry_rational(n: int, j: int, k: int) -> Fraction | None:
    """``2(n-k) / (2(n-k) - (j-k)) * C((n-j) + (n-k), j-k)``; ``None`` when 0/0."""
    if j < k:
        return Fraction(0)
    den = 2 * (n - k) - (j - k)
    if den == 0:
        return None
    return Fraction(2 * (n - k), den) * _binom_int((n - j) + (n - k), j - k)


def inverse_entry(n: int, j: int, k: int) -> int:
    return _binom_int(2 * (n - k), j - k)


def coeff_matrix(n: int, l: int, flavor: Flavor) -> ExactCoeffMatrix:
    if n < 1 or not 1 <= l <= n:
        raise InvalidArgument(f"need 1 <= l <= n, got n={n}, l={l}")
    if flavor == "forwardA":
        entry = forward_entry
    elif flavor == "inverseB":
        entry = inverse_entry
    else:
        raise InvalidArgument(f"unknown flavor {flavor!r}")
    rows = tuple(
        tuple(entry(n, j, k) if j >= k else 0 for k in range(l + 1)) for j in range(l + 1)
    )
    if flavor == "forwardA":
        for j in range(l + 1):
            for k in range(j + 1):
                r = forward_entry_rational(n, j, k)
                if r is not None and r != rows[j][k]:
                    raise IdentityFailure(
                        f"integer/rational mismatch at n={n}, (j,k)=({j},{k}): {rows[j][k]} vs {r}"
                    )
    return ExactCoeffMatrix(rows, n, flavor)


def _exact_matmul(X, Y):
    m = len(Y[0])
    return [[sum(X[i][t] * Y[t][j] for t in range(len(Y))) for j in range(m)] for i in range(len(X))]


def inverse_pair_product(n: int, l: int | None = None) -> list[list[int]]:
    """``D A(n) D B(n)`` in exact integers, ``D = diag((-1)**j)``."""
    l = n if l is None else l
    A = coeff_matrix(n, l, "forwardA").entries
    B = coeff_matrix(n, l, "inverseB").entries
    DAD = [[(-1) ** (i + j) * A[i][j] for j in range(l + 1)] for i in range(l + 1)]
    return _exact_matmul(DAD, B)


def check_inverse_pair(n: int) -> bool:
    P = inverse_pair_product(n)
    return all(P[i][j] == (1 if i == j else 0) for i in range(n + 1) for j in range(n + 1))


def vd_from_lax(K: InvariantVector, n: int) -> InvariantVector:
    """``(-1)^l H_l = sum_k A(n)_{l,k} K_k`` for ``l = 0..len(K)-1``."""
    if K.kind != "laxSpectral":
        raise InvalidArgument(f"expected laxSpectral invariants, got {K.kind}")
    l = K.level
    if l > n or K.n != n:
        raise LengthMismatch(f"invariant vector of level {l} (n={K.n}) does not fit n={n}")
    if l == 0:
        return InvariantVector("vanDiejen", K.values.copy(), n)
    A = coeff_matrix(n, l, "forwardA").as_float()
    signed = A @ K.values
    signs = (-1.0) ** np.arange(l + 1)
    return InvariantVector("vanDiejen", signs * signed, n)


def lax_from_vd(H: InvariantVector, n: int) -> InvariantVector:
    """``(-1)^m K_m = sum_l C(2(n-l), m-l) H_l``."""
    if H.kind != "vanDiejen":
        raise InvalidArgument(f"expected vanDiejen invariants, got {H.kind}")
    l = H.level
    if l > n or H.n != n:
        raise LengthMismatch(f"invariant vector of level {l} (n={H.n}) does not fit n={n}")
    if l == 0:
        return InvariantVector("laxSpectral", H.values.copy(), n)
    B = coeff_matrix(n, l, "inverseB").as_float()
    signs = (-1.0) ** np.arange(l + 1)
    return InvariantVector("laxSpectral", signs * (B @ H.values), n)


# ---------------------------------------------------------------------------
# recursions in the number of particles


def verify_recursions(q: Sequence[float], q_extra: float) -> dict:
    """Relative residuals of the one-particle-added recursions.

    For ``H``: levels ``1..n+1`` (``cH_{n+1}`` of ``n`` particles is zero).
    For ``K``: levels ``0..n+1``, with ``cK_{-1} = cK_{-2} = 0`` and
    ``cK_{n+1}(q) = cK_{n-1}(q)`` by the palindrome.
    """
    q = np.asarray(q, dtype=float)
    n = len(q)
    qq = np.append(q, q_extra)
    s2 = 4.0 * math.sinh(q_extra / 2.0) ** 2
    c2 = 2.0 * math.cosh(q_extra)

    def cH(l):
        return eval_cH(l, q) if 0 <= l <= n else 0.0

    def cK(k):
        if k < 0:
            return 0.0
        if k == n + 1:
            return eval_cK(n - 1, q) if n >= 1 else 0.0
        return eval_cK(k, q)

    h_res, k_res = [], []
    for l in range(1, n + 2):
        lhs = eval_cH(l, qq)
        rhs = cH(l) + s2 * cH(l - 1)
        h_res.append(abs(lhs - rhs) / max(abs(lhs), 1.0))
    for k in range(0, n + 2):
        lhs = eval_cK(k, qq)
        rhs = cK(k) - c2 * cK(k - 1) + cK(k - 2)
        k_res.append(abs(lhs - rhs) / max(abs(lhs), 1.0))
    return {"H": h_res, "K": k_res, "max": max(h_res + k_res)}


# ---------------------------------------------------------------------------
# exact identities


def identity_ratio(n: int, l: int, s: int) -> Fraction:
    """Left-hand side of the coefficient identity that must equal ``2**(l - s)``.

    ``s`` is the size of the signed subset. The weight ``2(n-k)/(2(n-k)-(l-k))``
    times the binomial is taken in its integer form, which agrees with the
    rational form wherever the latter is defined.
    """
    total = Fraction(0)
    for a in range((l - s) // 2 + 1):
        k = s + 2 * a
        total += forward_entry(n, l, k) * _binom_int(n - s, a)
    return total / _binom_int(n - s, l - s)


def split_binomial_sum(d: int) -> int:
    """The ``n = l`` reduction: ``2 sum_{a < d/2} C(d, a)`` plus the middle term if ``d`` is even."""
    if d % 2:
        return 2 * sum(_binom_int(d, a) for a in range(d // 2 + 1))
    return 2 * sum(_binom_int(d, a) for a in range(d // 2)) + _binom_int(d, d // 2)


def _t(A: int, B: int) -> int:
    # (A + B) / A * C(A, B) in integer form
    return _binom_int(A, B) + _binom_int(A - 1, B - 1)


def _t_rational(A: int, B: int) -> Fraction | None:
    if B < 0:
        return Fraction(0)
    if A == 0:
        return None
    return Fraction(A + B, A) * _binom_int(A, B)


def entry_identity_sides(A: int, B: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Both sides of the entrywise identity as ``(constant, coefficient of cosh)``.

    ``4 sinh^2(alpha/2)`` is rewritten as ``2 cosh(alpha) - 2``.
    """
    p, r = _t(A, B), _t(A + 1, B - 1)
    lhs = (p + 2 * r, -2 * r)
    rhs = (_t(A + 2, B) + _t(A, B - 2), -2 * r)
    return lhs, rhs


def _poly_matrices(n: int):
    """Both sides of ``H(n, n+1) A(n) = A(n+1) K(n, n+1)`` with entries ``(const, cosh)``."""
    size = n + 1
    An = [[forward_entry(n, j, k) if j >= k else 0 for k in range(size)] for j in range(size)]
    An1 = [[forward_entry(n + 1, j, k) if j >= k else 0 for k in range(size + 2)] for j in range(size)]
    lhs, rhs = {}, {}
    for j in range(size):
        for k in range(size):
            below = An[j - 1][k] if j >= 1 else 0
            # (1 - (2c - 2) I_{-1}) A(n)
            lhs[j, k] = (An[j][k] + 2 * below, -2 * below)
            # A(n+1) (1 - 2c I_{-1} + I_{-2}), A(n+1) restricted to the leading block
            right1 = An1[j][k + 1] if k + 1 < size else 0
            right2 = An1[j][k + 2] if k + 2 < size else 0
            rhs[j, k] = (An1[j][k] + right2, -2 * right1)
    return lhs, rhs


@dataclass
class IdentityReport:
    identity: str
    n_range: tuple[int, int]
    cells_checked: int = 0
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "identity": self.identity,
            "n_range": list(self.n_range),
            "cells_checked": self.cells_checked,
            "failures": self.failures,
            **({"notes": self.notes} if self.notes else {}),
        }


def verify_exact_identities(n_max: int, raise_on_failure: bool = True) -> list[IdentityReport]:
    """Exact sweep over all sizes ``1..n_max``.

    Checks the coefficient identity (sums against ``2**(l-s)``) and its
    ``n = l`` split-binomial form, the entrywise polynomial identity in
    ``cosh(alpha)`` in both integer and rational forms, the matrix equation
    linking consecutive sizes, the integer/rational agreement of the forward
    matrix, and the exact inverse pair.
    """
    if n_max < 1:
        raise InvalidArgument("n_max must be >= 1")
    rng = (1, n_max)
    ratio = IdentityReport("coefficient_sum_equals_power_of_two", rng)
    split = IdentityReport("split_binomial_sums", rng)
    entry = IdentityReport("entrywise_cosh_polynomial", rng)
    matrix = IdentityReport("consecutive_size_matrix_equation", rng)
    forward = IdentityReport("forward_integer_equals_rational", rng)
    inverse = IdentityReport("inverse_pair_DADB_identity", rng)
    ab_samples = []

    for n in range(1, n_max + 1):
        for l in range(0, n + 1):
            for s in range(0, l + 1):
                ratio.cells_checked += 1
                got = identity_ratio(n, l, s)
                if got != 2 ** (l - s):
                    ratio.failures.append({"n": n, "l": l, "s": s, "got": str(got)})
                if n == l:
                    split.cells_checked += 1
                    if split_binomial_sum(l - s) != 2 ** (l - s):
                        split.failures.append({"n": n, "d": l - s})

        for j in range(n + 1):
            for k in range(n + 1):
                A, B = 2 * n - j - k, j - k
                if len(ab_samples) < 8 and j >= k:
                    ab_samples.append({"n": n, "j": j, "k": k, "A": A, "B": B})
                entry.cells_checked += 1
                lhs, rhs = entry_identity_sides(A, B)
                ok = lhs == rhs
                # rational form, wherever all denominators are nonzero
                pr = [_t_rational(A, B), _t_rational(A + 1, B - 1), _t_rational(A + 2, B), _t_rational(A, B - 2)]
                if all(x is not None for x in pr):
                    p, r, p2, r2 = pr
                    ok = ok and (p + 2 * r, -2 * r) == (p2 + r2, -2 * r)
                if not ok:
                    entry.failures.append({"n": n, "j": j, "k": k, "lhs": lhs, "rhs": rhs})

                if j >= k:
                    forward.cells_checked += 1
                    rat = forward_entry_rational(n, j, k)
                    if rat is not None and rat != forward_entry(n, j, k):
                        forward.failures.append({"n": n, "j": j, "k": k})
                    if rat is None:
                        forward.notes.setdefault("singular_cells_defined_as_1", []).append([n, j, k])

        lhs, rhs = _poly_matrices(n)
        for key in lhs:
            matrix.cells_checked += 1
            if lhs[key] != rhs[key]:
                matrix.failures.append({"n": n, "jk": list(key), "lhs": lhs[key], "rhs": rhs[key]})

        inverse.cells_checked += (n + 1) ** 2
        if not check_inverse_pair(n):
            inverse.failures.append({"n": n})

    entry.notes["A_B_substitution_samples"] = ab_samples
    reports = [ratio, split, entry, matrix, forward, inverse]
    if raise_on_failure:
        for rep in reports:
            if rep.failures:
                raise IdentityFailure(f"{rep.identity}: first failure {rep.failures[0]}")
    return reports
