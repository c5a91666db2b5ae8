import itertools
import math

import numpy as np
import pytest

from bcrsvd.domain import PARAM_TABLE, sample_phase_point


def brute_elem_sym(values, m):
    """e_m by explicit enumeration of m-subsets."""
    return math.fsum(math.prod(c) for c in itertools.combinations(values, m))


def brute_H_l(l, lam, theta, params):
    """Literal complex transcription of the signed-subset formula for H_l.

    Both V factors are formed separately in complex arithmetic; the product
    must be a positive real and its principal square root is taken.
    """
    mu, nu, kappa = params.mu, params.nu, params.kappa
    n = len(lam)
    v = lambda x: (x + 1j * mu) / x
    w = lambda x: (x + 1j * nu) / x * (x + 1j * kappa) / x

    def V(J, eps, K):
        val = 1 + 0j
        for j, e in zip(J, eps):
            val *= w(e * lam[j])
        for a in range(len(J)):
            for b in range(a + 1, len(J)):
                val *= v(eps[a] * lam[J[a]] + eps[b] * lam[J[b]]) ** 2
        for j, e in zip(J, eps):
            for k in K:
                val *= v(e * lam[j] + lam[k]) * v(e * lam[j] - lam[k])
        return val

    def U(K, p):
        total = 0j
        for I in itertools.combinations(K, p):
            rest = [k for k in K if k not in I]
            for eps in itertools.product((1, -1), repeat=p):
                x = [e * lam[i] for e, i in zip(eps, I)]
                term = 1 + 0j
                for a in range(p):
                    term *= w(x[a])
                for a in range(p):
                    for b in range(a + 1, p):
                        term *= v(x[a] + x[b]) * v(-x[a] - x[b])
                for a in range(p):
                    for k in rest:
                        term *= v(x[a] + lam[k]) * v(x[a] - lam[k])
                total += term
        return (-1) ** p * total

    total = 0j
    for size in range(l + 1):
        for J in itertools.combinations(range(n), size):
            K = [k for k in range(n) if k not in J]
            for eps in itertools.product((1, -1), repeat=size):
                prod = V(J, eps, K) * V(J, tuple(-e for e in eps), K)
                assert abs(prod.imag) <= 1e-12 * abs(prod) and prod.real > 0
                th = sum(e * theta[j] for j, e in zip(J, eps))
                total += math.cosh(th) * np.sqrt(prod) * U(K, l - size)
    assert abs(total.imag) <= 1e-9 * (1 + abs(total))
    return total.real


@pytest.fixture(params=range(len(PARAM_TABLE)), ids=lambda i: f"p{i}")
def params(request):
    return PARAM_TABLE[request.param]


def points(n, count, base=0, **kw):
    return [sample_phase_point(n, base + 1000 * n + i, **kw) for i in range(count)]


#: One line per acceptance criterion, appended by tests/test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
