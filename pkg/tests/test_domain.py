import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcrsvd.domain import (
    PARAM_TABLE,
    Params,
    enumerate_signed_subsets,
    sample_phase_point,
    validate_params,
    validate_phase_point,
)
from bcrsvd.errors import (
    EmptyVector,
    InvalidArgument,
    LengthMismatch,
    NonFinite,
    NonPositive,
    OrderingViolation,
    SignViolation,
    ZeroCoupling,
)


def test_validate_params_accepts():
    assert validate_params(1.0, 0.5, 0.25) == Params(1.0, 0.5, 0.25)


@pytest.mark.parametrize(
    "args, err",
    [
        ((0.0, 1.0, 1.0), ZeroCoupling),
        ((1.0, 0.0, 1.0), ZeroCoupling),
        ((1.0, 1.0, -1.0), SignViolation),
        ((1.0, -1.0, 1.0), SignViolation),
        ((math.nan, 1.0, 1.0), NonFinite),
        ((1.0, math.inf, 1.0), NonFinite),
    ],
)
def test_validate_params_rejects(args, err):
    with pytest.raises(err):
        validate_params(*args)


def test_kappa_zero_allowed():
    assert validate_params(1.0, -2.0, 0.0).kappa == 0.0


def test_param_table_is_admissible():
    assert len(PARAM_TABLE) >= 20
    for p in PARAM_TABLE:
        assert validate_params(p.mu, p.nu, p.kappa) == p
    assert any(p.kappa == 0 for p in PARAM_TABLE)
    assert any(p.nu < 0 and p.kappa < 0 for p in PARAM_TABLE)


@given(
    st.floats(allow_nan=False, allow_infinity=False),
    st.floats(allow_nan=False, allow_infinity=False),
    st.floats(allow_nan=False, allow_infinity=False),
)
def test_validate_params_total_and_idempotent(mu, nu, kappa):
    try:
        p = validate_params(mu, nu, kappa)
    except (ZeroCoupling, SignViolation):
        assert mu == 0 or nu == 0 or nu * kappa < 0
        return
    assert validate_params(p.mu, p.nu, p.kappa) == p


def test_validate_phase_point():
    pt = validate_phase_point([2, 1], [0.3, -0.7])
    assert pt.lam == (2.0, 1.0) and pt.n == 2
    with pytest.raises(OrderingViolation):
        validate_phase_point([1, 2], [0, 0])
    with pytest.raises(NonPositive):
        validate_phase_point([1, -1], [0, 0])
    with pytest.raises(LengthMismatch):
        validate_phase_point([1], [0, 0])
    with pytest.raises(EmptyVector):
        validate_phase_point([], [])
    with pytest.raises(OrderingViolation):
        validate_phase_point([1.0, 1.0 - 1e-12], [0, 0])


def test_sample_deterministic():
    a = sample_phase_point(3, 7, 0.5, 3.0)
    b = sample_phase_point(3, 7, 0.5, 3.0)
    assert a == b
    assert sample_phase_point(3, 8, 0.5, 3.0) != a


@settings(max_examples=50)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(0.01, 3.0), st.floats(0.0, 5.0))
def test_sample_satisfies_contract(n, seed, gap, rng):
    pt = sample_phase_point(n, seed, gap, rng)
    assert validate_phase_point(pt.lam, pt.theta) == pt
    assert pt.lam[-1] >= gap
    assert all(a - b >= gap for a, b in zip(pt.lam, pt.lam[1:]))
    assert all(abs(t) <= rng for t in pt.theta)


def test_sample_rejects_bad_args():
    with pytest.raises(InvalidArgument):
        sample_phase_point(0, 1)
    with pytest.raises(InvalidArgument):
        sample_phase_point(2, 1, min_gap=0.0)


def test_enumerate_small():
    subs = list(enumerate_signed_subsets(2, 1))
    assert [(s.indices, s.signs) for s in subs] == [
        ((), ()),
        ((0,), (1,)),
        ((0,), (-1,)),
        ((1,), (1,)),
        ((1,), (-1,)),
    ]
    assert [(s.indices, s.signs) for s in enumerate_signed_subsets(3, 0)] == [((), ())]
    assert len(list(enumerate_signed_subsets(3, 3))) == 27


@pytest.mark.parametrize("n", range(0, 7))
def test_enumerate_counts(n):
    for k in range(n + 1):
        subs = list(enumerate_signed_subsets(n, k))
        assert len(subs) == sum(math.comb(n, j) * 2**j for j in range(k + 1))
        assert len({(s.indices, s.signs) for s in subs}) == len(subs)
    assert len(list(enumerate_signed_subsets(n, n))) == 3**n


def test_enumerate_rejects():
    with pytest.raises(InvalidArgument):
        list(enumerate_signed_subsets(2, 3))
    with pytest.raises(InvalidArgument):
        list(enumerate_signed_subsets(2, -1))


def test_signed_sum_and_complement():
    s = next(x for x in enumerate_signed_subsets(3, 2) if x.indices == (0, 2) and x.signs == (1, -1))
    assert s.signed_sum([1.0, 10.0, 100.0]) == -99.0
    assert s.complement(3) == (1,)
