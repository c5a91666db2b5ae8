"""Gradients, canonical Poisson brackets, the H-flow and scattering data.

Observables are evaluated on dual vectors seeded along all ``2n`` phase-space
coordinates, so one evaluation yields the full gradient. ``K_m`` observables go
through the Faddeev-LeVerrier recursion on the dual Lax matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from . import dual as dn
from .domain import (
    CHAMBER_GUARD,
    ActionVector,
    Params,
    PhasePoint,
    validate_phase_point,
)
from .errors import ChamberExit, InvalidArgument, NotAsymptotic, StepUnderflow
from .lax import _lax, build_lax
from .spectral import char_poly_eigen, leverrier
from .vandiejen import _family, _hamiltonian_l, _main_hamiltonian

STABILIZATION_TOL = 1e-2


@dataclass(frozen=True)
class Observable:
    """A named phase-space function ``evaluator(lam, theta, params)``.

    ``lam`` and ``theta`` are numpy vectors or :class:`~bcrsvd.dual.Dual` vectors.
    """

    identifier: str
    evaluator: Callable

    def __call__(self, point: PhasePoint, params: Params) -> float:
        lam, theta = point.as_arrays()
        return float(np.real(self.evaluator(lam, theta, params)))


def main_H() -> Observable:
    return Observable("mainH", _main_hamiltonian)


def H_level(l: int) -> Observable:
    def ev(lam, theta, params):
        if l == 0:
            return 1.0
        return _hamiltonian_l(l, [lam[i] for i in range(len(lam))], [theta[i] for i in range(len(theta))], params)

    return Observable(f"H_{l}", ev)


def K_level(m: int) -> Observable:
    def ev(lam, theta, params):
        return dn.real(leverrier(_lax(lam, theta, params))[m])

    return Observable(f"K_{m}", ev)


def coordinate(kind: str, k: int) -> Observable:
    """The coordinate function ``lambda_k`` (``kind='lambda'``) or ``theta_k``."""
    if kind not in ("lambda", "theta"):
        raise InvalidArgument(f"unknown coordinate kind {kind!r}")
    if kind == "lambda":
        return Observable(f"lambda_{k}", lambda lam, theta, params: lam[k])
    return Observable(f"theta_{k}", lambda lam, theta, params: theta[k])


def grad_observable(obs: Observable, point: PhasePoint, params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives ``(d/dlambda, d/dtheta)`` by forward-mode duals."""
    point = validate_phase_point(point.lam, point.theta)
    lam, theta = dn.seed_phase(*point.as_arrays())
    out = obs.evaluator(lam, theta, params)
    n = point.n
    if not isinstance(out, dn.Dual):  # constant observable
        return np.zeros(n), np.zeros(n)
    g = np.real(np.asarray(out.der, dtype=complex if np.iscomplexobj(out.der) else float))
    g = g.reshape(2 * n)
    return g[:n].copy(), g[n:].copy()


def _split(out, n: int):
    g = np.real(np.asarray(out.der)).reshape(2 * n)
    return float(np.real(out.val)), g[:n].copy(), g[n:].copy()


def family_gradients(point: PhasePoint, params: Params) -> dict:
    """Values and gradients of ``H_1..H_n`` and ``K_1..K_n`` in two dual passes.

    Returns ``{name: (value, d/dlambda, d/dtheta)}``. Same numbers as calling
    :func:`grad_observable` per member, at a fraction of the cost.
    """
    point = validate_phase_point(point.lam, point.theta)
    n = point.n
    lam, theta = dn.seed_phase(*point.as_arrays())
    levels = list(range(1, n + 1))
    H = _family([lam[i] for i in range(n)], [theta[i] for i in range(n)], params, levels)
    K = leverrier(_lax(lam, theta, params))
    out = {f"H_{l}": _split(H[l], n) for l in levels}
    out.update({f"K_{m}": _split(dn.real(K[m]), n) for m in levels})
    return out


def _bracket_from_grads(gf, gg) -> float:
    (fl, ft), (gl, gt) = gf, gg
    return float(np.dot(fl, gt) - np.dot(ft, gl))


def poisson_bracket(f: Observable, g: Observable, point: PhasePoint, params: Params) -> float:
    """``{f, g} = sum_k df/dlambda_k dg/dtheta_k - df/dtheta_k dg/dlambda_k``."""
    return _bracket_from_grads(grad_observable(f, point, params), grad_observable(g, point, params))


# ---------------------------------------------------------------------------
# flow


@dataclass
class Trajectory:
    times: np.ndarray
    lam: np.ndarray  # (T, n)
    theta: np.ndarray  # (T, n)
    conserved_log: dict = field(default_factory=dict)  # name -> (T,) array
    dense: Callable | None = None  # t -> state vector (lam, theta), continuous extension

    @property
    def n(self) -> int:
        return self.lam.shape[1]

    @property
    def states(self) -> list[PhasePoint]:
        return [PhasePoint(tuple(a), tuple(b)) for a, b in zip(self.lam, self.theta)]

    def max_relative_drift(self) -> dict:
        out = {}
        for name, vals in self.conserved_log.items():
            ref = abs(vals[0]) if vals[0] != 0 else 1.0
            out[name] = float(np.max(np.abs(vals - vals[0])) / ref)
        return out

    def state_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Positions and momenta at time(s) ``t`` from the continuous extension."""
        t = np.asarray(t, dtype=float)
        if self.dense is not None:
            y = self.dense(t)
        else:
            y = np.array([np.interp(t, self.times, col) for col in np.hstack([self.lam, self.theta]).T])
        return y[: self.n], y[self.n :]

    def theta_at(self, t: float) -> np.ndarray:
        return self.state_at(t)[1]


def hamilton_rhs(params: Params):
    """``(lam', theta') = (dH/dtheta, -dH/dlam)`` for the main Hamiltonian."""

    def rhs(t, y):
        n = len(y) // 2
        lam, theta = dn.seed_phase(y[:n], y[n:])
        g = _main_hamiltonian(lam, theta, params).der
        return np.concatenate([g[n:], -g[:n]])

    return rhs


def _conserved(lam, theta, params: Params) -> list[float]:
    pt = PhasePoint(tuple(lam), tuple(theta))
    H = float(_main_hamiltonian(np.asarray(lam), np.asarray(theta), params))
    K = char_poly_eigen(build_lax(pt, params, check=False)).K
    return [H] + [float(K[m]) for m in range(1, len(lam) + 1)]


def integrate_flow(
    point: PhasePoint,
    params: Params,
    t_end: float,
    tol: float = 1e-10,
    guard: float = CHAMBER_GUARD,
) -> Trajectory:
    """Integrate the main-Hamiltonian flow with an adaptive 8(5,3) Runge-Kutta pair.

    Every accepted step is stored; ``conserved_log`` records ``H`` and
    ``K_1..K_n`` at each of them.
    """
    if not t_end > 0:
        raise InvalidArgument("t_end must be positive")
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    point = validate_phase_point(point.lam, point.theta)
    n = point.n
    y0 = np.concatenate(point.as_arrays())

    def chamber(t, y):
        lam = y[:n]
        return min(np.min(-np.diff(lam)) if n > 1 else np.inf, lam[-1]) - guard

    chamber.terminal = True
    chamber.direction = -1

    sol = solve_ivp(
        hamilton_rhs(params),
        (0.0, t_end),
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol,
        events=chamber,
        dense_output=True,
    )
    times = sol.t
    lam, theta = sol.y[:n].T, sol.y[n:].T
    names = ["H"] + [f"K_{m}" for m in range(1, n + 1)]
    logs = np.array([_conserved(a, b, params) for a, b in zip(lam, theta)])
    traj = Trajectory(times, lam, theta, {nm: logs[:, i] for i, nm in enumerate(names)}, sol.sol)
    if sol.status == 1:
        raise ChamberExit(f"trajectory left the chamber at t={times[-1]:.6g}", traj)
    if sol.status != 0:
        raise StepUnderflow(f"integration failed: {sol.message}")
    return traj


@dataclass(frozen=True)
class ScatteringData:
    q_est: np.ndarray
    p_est: np.ndarray
    fit_window: tuple[float, float]
    p_windows: tuple[np.ndarray, np.ndarray]

    @property
    def stabilization(self) -> float:
        return float(np.max(np.abs(self.p_windows[1] - self.p_windows[0])))

    def as_dict(self) -> dict:
        return {
            "q_est": self.q_est.tolist(),
            "p_est": self.p_est.tolist(),
            "fit_window": list(self.fit_window),
            "p_first_half": self.p_windows[0].tolist(),
            "p_second_half": self.p_windows[1].tolist(),
            "stabilization": self.stabilization,
        }


def _window_mean(traj: Trajectory, q: np.ndarray, lo: float, hi: float, samples: int = 201):
    t = np.linspace(lo, hi, samples)
    lam, _ = traj.state_at(t)
    p_t = t[None, :] * np.sinh(q)[:, None] - lam
    return np.trapezoid(p_t, t, axis=1) / (hi - lo)


def extract_scattering(traj: Trajectory, L0_actions: ActionVector, tol: float = STABILIZATION_TOL) -> ScatteringData:
    """Asymptotic momenta and impact parameters from the tail of a trajectory.

    ``p_k(t) = t sinh(q_k) - lambda_k(t)`` uses the spectral actions and is
    averaged over the last 20% of the run, split into two halves; the halves
    must agree to ``tol``.
    """
    t_end = float(traj.times[-1])
    lo, mid = 0.8 * t_end, 0.9 * t_end
    q = L0_actions.as_array()
    first = _window_mean(traj, q, lo, mid)
    second = _window_mean(traj, q, mid, t_end)
    data = ScatteringData(
        q_est=traj.theta[-1].copy(),
        p_est=_window_mean(traj, q, lo, t_end),
        fit_window=(lo, t_end),
        p_windows=(first, second),
    )
    if data.stabilization > tol:
        raise NotAsymptotic(f"impact parameters not stabilised: windows differ by {data.stabilization:.3e}")
    return data
