"""Command-line interface: ``bcrsvd {eval,verify,identities,flow,bench}``.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
Structured reports are JSON on stdout; time series are CSV.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .domain import PARAM_TABLE, Params, PhasePoint, sample_phase_point, validate_params, validate_phase_point
from .dynamics import _bracket_from_grads, extract_scattering, family_gradients, integrate_flow
from .equivalence import (
    InvariantVector,
    coeff_matrix,
    eval_cH,
    eval_cH_elementary,
    eval_cK,
    lax_from_vd,
    vd_from_lax,
    verify_exact_identities,
    verify_recursions,
)
from .errors import ChamberExit, DomainError, NotAsymptotic, NumericalError, RSvDError
from .lax import LaxMatrix, build_factors, build_lax, structural_residuals
from .spectral import char_poly_eigen, extract_actions
from .vandiejen import MAX_DIRECT_N, eval_all_H, eval_main_H

DEFAULT_TOLERANCES = {
    "transform": 1e-9,
    "roundtrip": 1e-12,
    "structure": 1e-10,
    "anchor_H1": 1e-12,
    "anchor_K1": 1e-10,
    "pullback": 1e-9,
    "elementary": 1e-12,
    "recursion": 1e-11,
    "bracket": 1e-8,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    params: dict | None = None
    seed: int = 0
    samples: int = 0
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _emit(obj, stream=None) -> None:
    # json uses repr for floats: shortest string that round-trips exactly
    (stream or sys.stdout).write(json.dumps(obj, indent=2, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(f"not JSON serialisable: {type(x)}")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _params_from(args) -> Params | None:
    given = [args.mu, args.nu, args.kappa]
    if all(v is None for v in given):
        return None
    if any(v is None for v in given):
        raise UsageError("--mu, --nu and --kappa must be given together")
    return validate_params(args.mu, args.nu, args.kappa)


def _parse_point(text: str) -> PhasePoint:
    try:
        lam_s, theta_s = text.split(";")
        lam = [float(v) for v in lam_s.split(",") if v.strip()]
        theta = [float(v) for v in theta_s.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--point must look like 'l1,l2,...;t1,t2,...': {exc}") from exc
    return validate_phase_point(lam, theta)


def _tolerances(args) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    for key in tol:
        v = getattr(args, f"tol_{key}", None)
        if v is not None:
            tol[key] = v
    return tol


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)))


# ---------------------------------------------------------------------------
# shared per-point checks


def point_checks(point: PhasePoint, params: Params, perturb: float = 0.0) -> dict:
    """Residuals of every numeric relation at one phase point."""
    n = point.n
    H = eval_main_H(point, params)
    Hfam = eval_all_H(point, params)
    factors = build_factors(point, params)
    lax = build_lax(point, params, check=perturb == 0.0)
    if perturb:
        L = lax.L.copy()
        L[0, 0] += perturb
        lax = LaxMatrix(L)
    structure = structural_residuals(factors, lax)
    K = char_poly_eigen(lax)
    Kvec = K.K[: n + 1]
    Hv = vd_from_lax(InvariantVector("laxSpectral", Kvec, n), n).values
    Kv = lax_from_vd(InvariantVector("vanDiejen", Hfam, n), n).values
    round_trip = lax_from_vd(InvariantVector("vanDiejen", Hv, n), n).values
    try:
        q = extract_actions(lax).q
    except NumericalError as exc:
        q, action_error = None, f"{type(exc).__name__}: {exc}"
    else:
        action_error = None
    inf = float("inf")
    cH = None if q is None else [eval_cH(l, q) for l in range(n + 1)]
    return {
        "H": H,
        "H_family": Hfam,
        "K_family": K.K,
        "q_actions": list(q) if q is not None else None,
        "action_error": action_error,
        "residuals": {
            "transform_vd_from_lax": _rel(Hv, Hfam),
            "transform_lax_from_vd": _rel(Kv, Kvec),
            "roundtrip": _rel(round_trip, Kvec),
            "structure_max": max(
                v for k, v in structure.items() if k != "hermitian_L"
            ),
            "hermitian_L_rel": structure["hermitian_L"] / float(np.max(np.abs(lax.L))),
            "palindrome": K.palindrome_residual(),
            "anchor_H1": abs(Hfam[1] - 2.0 * (H - n)) / abs(2.0 * (H - n)),
            "anchor_K1": abs(K.K[1] + 2.0 * H) / abs(2.0 * H),
            "pullback_H": inf if q is None else max(abs(cH[l] - Hfam[l]) / abs(Hfam[l]) for l in range(n + 1)),
            "pullback_K": inf if q is None else max(abs(eval_cK(m, q) - Kvec[m]) / abs(Kvec[m]) for m in range(n + 1)),
            "elementary": inf
            if q is None
            else max(abs(cH[l] - eval_cH_elementary(l, q)) / max(abs(cH[l]), 1e-300) for l in range(n + 1)),
        },
    }


_CHECK_TOL = {
    "transform_vd_from_lax": "transform",
    "transform_lax_from_vd": "transform",
    "roundtrip": "roundtrip",
    "structure_max": "structure",
    "hermitian_L_rel": "structure",
    "palindrome": "structure",
    "anchor_H1": "anchor_H1",
    "anchor_K1": "anchor_K1",
    "pullback_H": "pullback",
    "pullback_K": "pullback",
    "elementary": "elementary",
}


def bracket_residual(point: PhasePoint, params: Params) -> float:
    """Max over pairs of ``|{F, G}| / (1 + |F||G|)`` for all ``H_l`` and ``K_m``."""
    fam = list(family_gradients(point, params).values())
    worst = 0.0
    for i in range(len(fam)):
        for j in range(i + 1, len(fam)):
            b = _bracket_from_grads(fam[i][1:], fam[j][1:])
            worst = max(worst, abs(b) / (1.0 + abs(fam[i][0] * fam[j][0])))
    return worst


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    params = _params_from(args) or Params(1.0, 1.0, 0.5)
    if args.point:
        point = _parse_point(args.point)
    else:
        if args.n is None:
            raise UsageError("eval needs --n with --seed, or --point")
        point = sample_phase_point(args.n, args.seed)
    if point.n > MAX_DIRECT_N:
        raise UsageError(f"n={point.n} exceeds {MAX_DIRECT_N} for the combinatorial family; use bench --routes spectral")
    res = point_checks(point, params)
    res["residuals"]["K1_plus_2H"] = abs(res["K_family"][1] + 2.0 * res["H"])
    cfg = RunConfig("eval", point.n, params.as_dict(), args.seed, 1, _tolerances(args), {"point": args.point})
    out = {"config": cfg.as_dict(), "point": point.as_dict(), "params": params.as_dict()}
    out.update(
        H=res["H"],
        H_family=res["H_family"],
        K_family=res["K_family"],
        q_actions=res["q_actions"],
        transform_residuals=res["residuals"],
    )
    if args.dump_lax:
        out["lax"] = build_lax(point, params).to_json()
    _emit(out)
    return 0


def cmd_verify(args) -> int:
    tol = _tolerances(args)
    fixed = _params_from(args)
    sizes = [args.n] if args.single else list(range(1, (args.n or 4) + 1))
    if max(sizes) > 6:
        raise UsageError("numeric verification sweep supports n <= 6")
    if args.include_brackets and max(sizes) > 4:
        raise UsageError("bracket sweep supports n <= 4")
    cfg = RunConfig(
        "verify",
        max(sizes),
        fixed.as_dict() if fixed else None,
        args.seed,
        args.samples,
        tol,
        {"sizes": sizes, "perturb": args.perturb, "include_brackets": args.include_brackets},
    )
    worst: dict = {}
    first_failure = None
    for n in sizes:
        for i in range(args.samples):
            params = fixed or PARAM_TABLE[i % len(PARAM_TABLE)]
            point = sample_phase_point(n, args.seed * 100003 + 1000 * n + i)
            try:
                res = point_checks(point, params, perturb=args.perturb)["residuals"]
            except NumericalError as exc:
                res = {"numerical_error": float("inf")}
                first_failure = first_failure or {"check": type(exc).__name__, "n": n, "sample": i, "detail": str(exc)}
            rq = np.random.default_rng(args.seed * 7919 + 31 * n + i)
            qv = np.sort(rq.uniform(0.05, 3.0, size=n))[::-1]
            res["recursion"] = verify_recursions(qv, float(rq.uniform(-3.0, 3.0)))["max"]
            if args.include_brackets:
                res["bracket"] = bracket_residual(point, params)
            for k, v in res.items():
                worst[k] = max(worst.get(k, 0.0), v)
                limit = tol.get(_CHECK_TOL.get(k, k), 0.0)
                if v > limit and first_failure is None:
                    first_failure = {"check": k, "n": n, "sample": i, "residual": v, "tolerance": limit}
    checks = {
        k: {"max_residual": v, "tolerance": tol.get(_CHECK_TOL.get(k, k), 0.0), "pass": v <= tol.get(_CHECK_TOL.get(k, k), 0.0)}
        for k, v in worst.items()
    }
    ok = first_failure is None
    _emit({"config": cfg.as_dict(), "checks": checks, "pass": ok, "first_failure": first_failure})
    return 0 if ok else 1


def cmd_identities(args) -> int:
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    if args.n_max > 60:
        raise UsageError("--n-max must be <= 60")
    cfg = RunConfig("identities", args.n_max, None, 0, 0, {"exact": 0}, {})
    t0 = time.perf_counter()
    reports = verify_exact_identities(args.n_max, raise_on_failure=False)
    out = {
        "config": cfg.as_dict(),
        "reports": [r.as_dict() for r in reports],
        "failures": sum(len(r.failures) for r in reports),
        "seconds": time.perf_counter() - t0,
    }
    if args.n_max <= 3:
        out["matrices"] = {
            "forwardA": coeff_matrix(args.n_max, args.n_max, "forwardA").as_lists(),
            "inverseB": coeff_matrix(args.n_max, args.n_max, "inverseB").as_lists(),
        }
    _emit(out)
    return 0 if out["failures"] == 0 else 1


def cmd_flow(args) -> int:
    if not args.t_end > 0:
        raise UsageError("--t-end must be positive")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    params = _params_from(args) or Params(1.0, 1.0, 0.5)
    if args.point:
        point = _parse_point(args.point)
    else:
        point = sample_phase_point(args.n or 2, args.seed, min_gap=1.0, theta_range=2.0)
    cfg = RunConfig("flow", point.n, params.as_dict(), args.seed, 1, {"integrator": args.tol}, {"t_end": args.t_end})
    q_spec = extract_actions(build_lax(point, params))
    partial = False
    try:
        traj = integrate_flow(point, params, args.t_end, args.tol)
    except ChamberExit as exc:
        traj, partial = exc.trajectory, True

    names = list(traj.conserved_log)
    stream = sys.stdout if args.csv == "-" else open(args.csv, "w", newline="")
    try:
        w = csv.writer(stream)
        n = traj.n
        w.writerow(["t"] + [f"lambda_{k + 1}" for k in range(n)] + [f"theta_{k + 1}" for k in range(n)] + names)
        for i, t in enumerate(traj.times):
            row = [t, *traj.lam[i], *traj.theta[i], *(traj.conserved_log[nm][i] for nm in names)]
            w.writerow([_fmt(float(x)) for x in row])
    finally:
        if stream is not sys.stdout:
            stream.close()

    drift = traj.max_relative_drift()
    q = np.array(q_spec.q)
    summary = {
        "config": cfg.as_dict(),
        "point": point.as_dict(),
        "partial": partial,
        "steps": len(traj.times),
        "drift": drift,
        "K_drift_max": max(v for k, v in drift.items() if k.startswith("K_")),
        "q_spectral": q.tolist(),
        "theta_final": traj.theta[-1].tolist(),
        "q_two_route_max_diff": float(np.max(np.abs(traj.theta[-1] - q))),
    }
    try:
        summary["scattering"] = extract_scattering(traj, q_spec).as_dict()
        summary["p_stabilized"] = True
    except NotAsymptotic as exc:
        summary["p_stabilized"] = False
        summary["scattering_error"] = str(exc)
    out = sys.stderr if args.csv == "-" and args.json is None else None
    if args.json:
        with open(args.json, "w") as fh:
            _emit(summary, fh)
    else:
        _emit(summary, out)
    return 0


def cmd_bench(args) -> int:
    routes = args.routes.split(",")
    for r in routes:
        if r not in ("direct", "spectral"):
            raise UsageError(f"unknown route {r!r}")
    lo, hi = args.n_min, args.n_max
    if lo < 1 or hi < lo:
        raise UsageError("need 1 <= --n-min <= --n-max")
    if "direct" in routes and hi > MAX_DIRECT_N:
        raise UsageError(f"direct route supports n <= {MAX_DIRECT_N}")
    params = _params_from(args) or Params(1.0, 1.0, 0.5)
    w = csv.writer(sys.stdout)
    w.writerow(["n", "direct_seconds", "spectral_seconds", "max_residual", "valid"])
    invalid = False
    crossover = None
    for n in range(lo, hi + 1):
        point = sample_phase_point(n, args.seed)
        times, fams = {}, {}
        for r in routes:
            t0 = time.perf_counter()
            for _ in range(args.repeat):
                if r == "direct":
                    fams[r] = eval_all_H(point, params)
                else:
                    K = char_poly_eigen(build_lax(point, params, check=False)).K[: n + 1]
                    fams[r] = vd_from_lax(InvariantVector("laxSpectral", K, n), n).values
            times[r] = (time.perf_counter() - t0) / args.repeat
        if len(fams) == 2:
            res = _rel(fams["spectral"], fams["direct"])
            valid = res <= DEFAULT_TOLERANCES["transform"]
        else:
            res, valid = float("nan"), True
        invalid |= not valid
        if crossover is None and len(times) == 2 and times["spectral"] < times["direct"]:
            crossover = n
        w.writerow(
            [n, _fmt(times.get("direct", float("nan"))), _fmt(times.get("spectral", float("nan"))), _fmt(res), valid]
        )
    if len(routes) == 2:
        sys.stderr.write(f"# crossover_n={crossover}\n")
    return 1 if invalid else 0


# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, n_default=None) -> None:
    p.add_argument("--n", type=int, default=n_default)
    p.add_argument("--mu", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--point", help="explicit point 'lambda_1,...;theta_1,...'")
    for key in DEFAULT_TOLERANCES:
        p.add_argument(f"--tol-{key.replace('_', '-')}", dest=f"tol_{key}", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcrsvd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate both families at one point")
    _common(p)
    p.add_argument("--dump-lax", action="store_true", help="include L as [re, im] pairs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="numeric verification sweep")
    _common(p, n_default=4)
    p.add_argument("--single", action="store_true", help="only size --n instead of 1..n")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--perturb", type=float, default=0.0, help="fault injection added to L[0,0]")
    p.add_argument("--include-brackets", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("identities", help="exact integer/rational identity sweep")
    p.add_argument("--n-max", type=int, default=30)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("flow", help="integrate the H-flow and extract scattering data")
    _common(p)
    p.add_argument("--t-end", type=float, default=50.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--csv", default="-", help="trajectory CSV path ('-' = stdout)")
    p.add_argument("--json", help="summary JSON path (default: stdout, or stderr when CSV goes to stdout)")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("bench", help="time the direct and spectral routes")
    _common(p)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--routes", default="direct,spectral")
    p.add_argument("--repeat", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        return 2
    except RSvDError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
