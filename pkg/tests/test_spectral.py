import math

import numpy as np
import pytest

from bcrsvd.domain import PARAM_TABLE
from bcrsvd.equivalence import eval_cH, eval_cK
from bcrsvd.errors import DegenerateAction, PairingFailure, PositivityViolation
from bcrsvd.lax import LaxMatrix, build_lax
from bcrsvd.spectral import (
    char_poly_eigen,
    char_poly_leverrier,
    extract_actions,
    monic_from_roots,
)
from bcrsvd.vandiejen import eval_all_H, eval_main_H

from conftest import points


def diag_lax(q):
    q = np.asarray(q, dtype=float)
    return LaxMatrix(np.diag(np.concatenate([np.exp(-q), np.exp(q)])).astype(complex))


def test_monic_from_roots():
    np.testing.assert_allclose(monic_from_roots([2.0, 0.5]), [1.0, -2.5, 1.0])
    np.testing.assert_allclose(monic_from_roots([1.0, 2.0, 3.0]), np.poly([1.0, 2.0, 3.0]))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_identity_matrix(n):
    K = char_poly_eigen(LaxMatrix(np.eye(2 * n, dtype=complex))).K
    expect = [(-1) ** m * math.comb(2 * n, m) for m in range(2 * n + 1)]
    np.testing.assert_allclose(K, expect, rtol=1e-14)
    np.testing.assert_allclose(char_poly_leverrier(LaxMatrix(np.eye(2 * n, dtype=complex))).K, expect, rtol=1e-13)


def test_leverrier_2x2():
    K = char_poly_leverrier(LaxMatrix(np.diag([2.0, 0.5]).astype(complex))).K
    np.testing.assert_allclose(K, [1.0, -2.5, 1.0], rtol=1e-15)


def test_diagonal_asymptotic_form():
    q = (2.0, 1.0, 0.5)
    L = diag_lax(q)
    K = char_poly_eigen(L).K
    for m in range(4):
        assert K[m] == pytest.approx(eval_cK(m, q), rel=1e-13)
    np.testing.assert_allclose(extract_actions(L).q, q, rtol=1e-15)


@pytest.mark.parametrize("n", range(1, 7))
def test_eigen_invariants(n, params):
    for pt in points(n, 4):
        L = build_lax(pt, params)
        cp = char_poly_eigen(L)
        assert cp.K[0] == 1.0
        assert cp.palindrome_residual() <= 1e-10
        H = eval_main_H(pt, params)
        assert cp.K[1] == pytest.approx(-2 * H, rel=1e-10)
        ev = np.linalg.eigvalsh(L.L)
        np.testing.assert_allclose(np.sort(ev), np.sort(1 / ev), rtol=1e-8)


@pytest.mark.parametrize("n", range(1, 5))
def test_leverrier_agrees_with_eigen(n):
    for i, pt in enumerate(points(n, 10)):
        L = build_lax(pt, PARAM_TABLE[i])
        a, b = char_poly_eigen(L).K, char_poly_leverrier(L).K
        np.testing.assert_allclose(b, a, rtol=1e-8)
        assert char_poly_leverrier(L).palindrome_residual() <= 1e-8


@pytest.mark.parametrize("n", range(1, 7))
def test_actions_reproduce_both_families(n):
    for i, pt in enumerate(points(n, 5)):
        p = PARAM_TABLE[(i + n) % 20]
        L = build_lax(pt, p)
        q = extract_actions(L).q
        assert all(a > b for a, b in zip(q, q[1:])) and q[-1] > 0
        H = eval_all_H(pt, p)
        K = char_poly_eigen(L).K
        for l in range(n + 1):
            assert eval_cH(l, q) == pytest.approx(H[l], rel=1e-9)
            assert eval_cK(l, q) == pytest.approx(K[l], rel=1e-9)


def test_extract_errors():
    with pytest.raises(PositivityViolation):
        extract_actions(LaxMatrix(np.diag([-1.0, 2.0]).astype(complex)))
    with pytest.raises(PairingFailure):
        extract_actions(LaxMatrix(np.diag([3.0, 2.0]).astype(complex)))
    with pytest.raises(DegenerateAction):
        extract_actions(diag_lax([1.0, 0.0]))
