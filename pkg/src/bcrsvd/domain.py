"""Domain types, validation and reproducible sampling of phase points.

Particle indices are 0-based throughout the package: a system of size ``n``
has particles ``0 .. n-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    EmptyVector,
    InvalidArgument,
    LengthMismatch,
    NonFinite,
    NonPositive,
    OrderingViolation,
    SignViolation,
    ZeroCoupling,
)

#: Minimum admissible gap between neighbouring positions (and from the wall at 0).
CHAMBER_GUARD = 1e-9


@dataclass(frozen=True)
class Params:
    """The three real couplings ``mu``, ``nu``, ``kappa``."""

    mu: float
    nu: float
    kappa: float

    def as_dict(self) -> dict:
        return {"mu": self.mu, "nu": self.nu, "kappa": self.kappa}


@dataclass(frozen=True)
class PhasePoint:
    """Positions ``lam`` in the open Weyl chamber and momenta ``theta``."""

    lam: tuple[float, ...]
    theta: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.lam)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lam, dtype=float), np.array(self.theta, dtype=float)

    def as_dict(self) -> dict:
        return {"lambda": list(self.lam), "theta": list(self.theta)}


@dataclass(frozen=True)
class ActionVector:
    """Action variables ``q``, strictly decreasing and positive."""

    q: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.q)

    def as_array(self) -> np.ndarray:
        return np.array(self.q, dtype=float)


@dataclass(frozen=True)
class SignedSubset:
    """A subset ``indices`` of particles with a sign (+1/-1) attached to each."""

    indices: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.signs):
            raise InvalidArgument("signs must be given for exactly the indices")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise InvalidArgument("indices must be strictly increasing")
        if any(s not in (1, -1) for s in self.signs):
            raise InvalidArgument("signs must be +1 or -1")

    def __len__(self) -> int:
        return len(self.indices)

    def signed_sum(self, values):
        """``sum_j eps_j * values[j]`` over the subset (0 for the empty set)."""
        total = 0.0
        for j, s in zip(self.indices, self.signs):
            total = total + s * values[j]
        return total

    def complement(self, n: int) -> tuple[int, ...]:
        members = set(self.indices)
        return tuple(k for k in range(n) if k not in members)


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise NonFinite(f"non-finite input {v!r}")


def validate_params(mu: float, nu: float, kappa: float) -> Params:
    mu, nu, kappa = float(mu), float(nu), float(kappa)
    _check_finite(mu, nu, kappa)
    if mu == 0.0 or nu == 0.0:
        raise ZeroCoupling(f"mu and nu must be nonzero (mu={mu}, nu={nu})")
    if nu * kappa < 0.0:
        raise SignViolation(f"nu*kappa must be >= 0 (nu={nu}, kappa={kappa})")
    return Params(mu, nu, kappa)


def validate_phase_point(
    lam: Sequence[float], theta: Sequence[float], guard: float = CHAMBER_GUARD
) -> PhasePoint:
    """Check ``lam[0] > lam[1] > ... > lam[n-1] > 0`` with gaps of at least ``guard``."""
    lam = tuple(float(x) for x in lam)
    theta = tuple(float(x) for x in theta)
    if len(lam) != len(theta):
        raise LengthMismatch(f"len(lambda)={len(lam)} != len(theta)={len(theta)}")
    if not lam:
        raise EmptyVector("phase point needs n >= 1")
    _check_finite(*lam, *theta)
    for k, (a, b) in enumerate(zip(lam, lam[1:])):
        if a - b < guard:
            raise OrderingViolation(
                f"lambda must be strictly decreasing: lambda[{k}]={a} vs lambda[{k + 1}]={b}"
            )
    if lam[-1] < guard:
        raise NonPositive(f"lambda must be positive, got lambda[{len(lam) - 1}]={lam[-1]}")
    return PhasePoint(lam, theta)


def sample_phase_point(
    n: int, seed: int, min_gap: float = 0.5, theta_range: float = 2.0
) -> PhasePoint:
    """Deterministic random point: gaps ``min_gap + Exp(1)``, momenta uniform in ``[-r, r]``."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if not min_gap > 0:
        raise InvalidArgument("min_gap must be positive")
    rng = np.random.default_rng(seed)
    gaps = min_gap + rng.exponential(1.0, size=n)
    lam = np.cumsum(gaps[::-1])[::-1]
    theta = rng.uniform(-theta_range, theta_range, size=n)
    return validate_phase_point(lam, theta)


def enumerate_signed_subsets(n: int, max_size: int) -> Iterator[SignedSubset]:
    """All signed subsets of ``{0..n-1}`` with at most ``max_size`` elements.

    Order is lexicographic in the index tuple, then ``+`` before ``-`` per
    position. The count is ``sum_j C(n, j) 2**j``.
    """
    if n < 0 or not 0 <= max_size <= n:
        raise InvalidArgument(f"need 0 <= max_size <= n, got n={n}, max_size={max_size}")
    subsets = [c for size in range(max_size + 1) for c in combinations(range(n), size)]
    subsets.sort()
    for indices in subsets:
        for signs in product((1, -1), repeat=len(indices)):
            yield SignedSubset(indices, signs)


PARAM_TABLE: tuple[Params, ...] = tuple(
    Params(*t)
    for t in [
        (1.0, 1.0, 0.5),
        (1.0, 0.5, 0.25),
        (0.5, 1.0, 0.0),
        (2.0, -1.0, -0.5),
        (1.0, -0.3, -1.2),
        (-1.0, 1.0, 1.0),
        (-0.7, -0.5, 0.0),
        (0.3, 0.2, 0.1),
        (1.5, 2.0, 3.0),
        (1.0, 1.0, 0.0),
        (0.8, -2.0, -0.1),
        (-1.3, 0.7, 2.5),
        (0.4, 1.5, 0.6),
        (2.5, 0.3, 0.9),
        (-0.2, -1.1, -0.4),
        (1.2, 0.9, 1.8),
        (0.6, -0.6, 0.0),
        (1.7, 2.2, 0.05),
        (-2.0, -0.8, -2.0),
        (0.9, 0.1, 4.0),
    ]
)
"""Twenty admissible coupling triples used by verification sweeps."""
