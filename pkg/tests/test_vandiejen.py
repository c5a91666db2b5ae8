import math

import numpy as np
import pytest

from bcrsvd.domain import PARAM_TABLE, Params, PhasePoint, SignedSubset, sample_phase_point, validate_phase_point
from bcrsvd.equivalence import eval_cH
from bcrsvd.errors import DomainError, InvalidArgument
from bcrsvd.vandiejen import (
    _family,
    eval_all_H,
    eval_H_l,
    eval_main_H,
    eval_U,
    eval_V_pair,
    w_kernel,
)

from conftest import brute_H_l, points


def test_main_H_n1_hand_value():
    pt = validate_phase_point([1.0], [0.0])
    assert eval_main_H(pt, Params(1.0, 1.0, 0.0)) == pytest.approx(math.sqrt(2.0), abs=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_H1_is_twice_H_minus_n(n, params):
    for pt in points(n, 3):
        H = eval_main_H(pt, params)
        assert eval_H_l(1, pt, params) == pytest.approx(2 * (H - n), rel=1e-12)


def test_main_H_far_apart_is_free():
    theta = (0.4, -1.1, 0.2)
    pt = validate_phase_point([3e6, 2e6, 1e6], theta)
    H = eval_main_H(pt, PARAM_TABLE[0])
    assert H == pytest.approx(sum(math.cosh(t) for t in theta), abs=1e-5)


def test_U_trivial_and_single():
    p = Params(1.3, 0.7, 0.4)
    lam = [2.5, 1.5, 0.7]
    assert eval_U((0, 2), 0, lam, p) == 1.0
    for k in range(3):
        assert eval_U((k,), 1, lam, p) == pytest.approx(-2 * (1 - p.nu * p.kappa / lam[k] ** 2), rel=1e-14)


def test_U_pair_matches_literal_enumeration():
    p = PARAM_TABLE[3]
    pt = sample_phase_point(2, 11)
    lam = pt.lam
    v = lambda x: (x + 1j * p.mu) / x
    total = 0j
    for e1 in (1, -1):
        for e2 in (1, -1):
            x1, x2 = e1 * lam[0], e2 * lam[1]
            total += w_kernel(x1, p.nu, p.kappa) * w_kernel(x2, p.nu, p.kappa) * v(x1 + x2) * v(-x1 - x2)
    assert abs(total.imag) < 1e-12
    assert eval_U((0, 1), 2, lam, p) == pytest.approx(total.real, rel=1e-13)


def test_U_rejects():
    with pytest.raises(InvalidArgument):
        eval_U((0,), 2, [1.0], PARAM_TABLE[0])
    with pytest.raises(DomainError):
        eval_U((0, 1), 1, [1.0, 1.0], PARAM_TABLE[0])


def test_V_pair_values():
    p = Params(0.9, 1.2, 0.3)
    lam = [2.0, 0.5]
    assert eval_V_pair(SignedSubset((), ()), (0, 1), lam, p) == 1.0
    single = (1 + p.nu**2 / 4) * (1 + p.kappa**2 / 4)
    for s in (1, -1):
        assert eval_V_pair(SignedSubset((0,), (s,)), (), lam, p) == pytest.approx(single, rel=1e-15)
    cross = single * (1 + p.mu**2 / 1.5**2) * (1 + p.mu**2 / 2.5**2)
    assert eval_V_pair(SignedSubset((0,), (1,)), (1,), lam, p) == pytest.approx(cross, rel=1e-14)


def test_V_pair_matches_complex_product():
    p = PARAM_TABLE[5]
    lam = [3.1, 1.7, 0.6]
    v = lambda x: (x + 1j * p.mu) / x
    w = lambda x: w_kernel(x, p.nu, p.kappa)

    def V(eps):
        x0, x1 = eps[0] * lam[0], eps[1] * lam[1]
        return w(x0) * w(x1) * v(x0 + x1) ** 2 * v(x0 + lam[2]) * v(x0 - lam[2]) * v(x1 + lam[2]) * v(x1 - lam[2])

    for eps in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
        ref = V(eps) * V((-eps[0], -eps[1]))
        got = eval_V_pair(SignedSubset((0, 1), eps), (2,), lam, p)
        assert got == pytest.approx(ref.real, rel=1e-13)
    with pytest.raises(InvalidArgument):
        eval_V_pair(SignedSubset((0,), (1,)), (0,), lam, p)


def test_H_levels_n1_hand_expansion(params):
    lam, th = 0.8, 0.6
    pt = validate_phase_point([lam], [th])
    x2 = lam * lam
    expect = 2 * math.cosh(th) * math.sqrt((1 + params.nu**2 / x2) * (1 + params.kappa**2 / x2))
    expect += -2 + 2 * params.nu * params.kappa / x2
    assert eval_H_l(0, pt, params) == 1.0
    assert eval_H_l(1, pt, params) == pytest.approx(expect, rel=1e-14)


def test_H_l_level_range():
    pt = sample_phase_point(2, 0)
    with pytest.raises(InvalidArgument):
        eval_H_l(3, pt, PARAM_TABLE[0])


@pytest.mark.parametrize("n", range(1, 6))
def test_matches_complex_brute_force(n):
    for i, pt in enumerate(points(n, 3 if n < 5 else 1, base=77)):
        p = PARAM_TABLE[(3 * i + n) % len(PARAM_TABLE)]
        fam = eval_all_H(pt, p)
        for l in range(n + 1):
            ref = 1.0 if l == 0 else brute_H_l(l, pt.lam, pt.theta, p)
            assert fam[l] == pytest.approx(ref, rel=1e-10)


def test_eval_all_matches_individual_bitwise():
    for n in (1, 3):
        pt = sample_phase_point(n, 5)
        fam = eval_all_H(pt, PARAM_TABLE[1])
        assert fam[0] == 1.0
        for l in range(n + 1):
            assert fam[l] == eval_H_l(l, pt, PARAM_TABLE[1])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_even_in_theta(n):
    for pt in points(n, 3):
        flipped = PhasePoint(pt.lam, tuple(-t for t in pt.theta))
        a, b = eval_all_H(pt, PARAM_TABLE[2]), eval_all_H(flipped, PARAM_TABLE[2])
        np.testing.assert_allclose(a, b, rtol=1e-13)


def test_weyl_invariance_of_unsorted_evaluation():
    # the summation formula itself is symmetric under relabelling and sign flips of lambda
    p = PARAM_TABLE[7]
    pt = sample_phase_point(4, 3)
    lam, th = list(pt.lam), list(pt.theta)
    ref = _family(lam, th, p, [1, 2, 3, 4])
    perm = [2, 0, 3, 1]
    lam2 = [lam[k] for k in perm]
    th2 = [th[k] for k in perm]
    for l, val in _family(lam2, th2, p, [1, 2, 3, 4]).items():
        assert val == pytest.approx(ref[l], rel=1e-12)
    # lambda_k -> -lambda_k together with theta_k -> -theta_k
    lam3 = [-lam[0]] + lam[1:]
    th3 = [-th[0]] + th[1:]
    for l, val in _family(lam3, th3, p, [1, 2, 3, 4]).items():
        assert val == pytest.approx(ref[l], rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_free_limit_approaches_action_formula(n):
    theta = sample_phase_point(n, 9).theta
    lam = tuple(1e6 * (n - k) for k in range(n))
    pt = validate_phase_point(lam, theta)
    for l in range(n + 1):
        assert eval_H_l(l, pt, PARAM_TABLE[0]) == pytest.approx(eval_cH(l, theta), abs=1e-4)
