import numpy as np
import pytest

from bcrsvd.domain import PARAM_TABLE, Params, validate_phase_point
from bcrsvd.lax import LaxMatrix, build_factors, build_lax, involution, structural_residuals
from bcrsvd.vandiejen import eval_main_H

from conftest import points


def test_involution():
    C = involution(3)
    np.testing.assert_array_equal(C @ C, np.eye(6))
    np.testing.assert_array_equal(C, C.T)


def test_z_single_particle():
    p = Params(1.0, 0.7, 0.2)
    f = build_factors(validate_phase_point([1.3], [0.4]), p)
    assert f.z[0] == pytest.approx(-(1 + 1j * 0.7 / 1.3), rel=1e-15)


def test_kappa_zero_gives_trivial_h():
    f = build_factors(validate_phase_point([2.0, 0.5], [0.1, 0.2]), Params(1.0, 1.0, 0.0))
    np.testing.assert_allclose(f.h, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("n", range(1, 5))
def test_factor_invariants(n, params):
    for pt in points(n, 5):
        f = build_factors(pt, params)
        theta = np.array(pt.theta)
        assert np.all(np.abs(f.z) > 0)
        np.testing.assert_allclose(np.abs(f.F[:n]) ** 2, np.exp(-theta) * np.abs(f.z), rtol=1e-13)
        np.testing.assert_allclose(f.F[:n] * f.F[n:], np.conj(f.z), rtol=1e-13)
        np.testing.assert_allclose(np.diag(f.A).real, np.abs(f.F) ** 2, rtol=1e-13)
        assert np.max(np.abs(f.A - f.A.conj().T)) <= 1e-14 * max(1.0, np.max(np.abs(f.A)))
        assert np.max(np.abs(f.h - f.h.conj().T)) <= 1e-14
        # ChC is the exact inverse of h
        np.testing.assert_allclose(f.C @ f.h @ f.C, np.linalg.inv(f.h), atol=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_lax_structure(n, params):
    for pt in points(n, 5):
        L = build_lax(pt, params)  # raises StructuralResidual on breach
        res = structural_residuals(build_factors(pt, params), L)
        assert res["CLCL_minus_I"] <= 1e-10
        assert res["det_L_minus_1"] <= 1e-10
        assert res["hermitian_L"] <= 1e-12 * np.max(np.abs(L.L))
        H = eval_main_H(pt, params)
        assert abs(np.trace(L.L) - 2 * H) <= 1e-10 * (1 + 2 * H)
        assert np.min(np.linalg.eigvalsh(L.L)) > 0


def test_perturbation_is_detected():
    pt = points(2, 1)[0]
    f = build_factors(pt, PARAM_TABLE[0])
    L = build_lax(pt, PARAM_TABLE[0]).L.copy()
    L[0, 1] += 1e-3
    res = structural_residuals(f, LaxMatrix(L))
    assert res["CLCL_minus_I"] >= 1e-4


def test_json_dump_shape():
    L = build_lax(points(2, 1)[0], PARAM_TABLE[0])
    dump = L.to_json()
    assert len(dump) == 4 and len(dump[0]) == 4 and len(dump[0][0]) == 2
    assert dump[1][2] == [L.L[1, 2].real, L.L[1, 2].imag]
