"""Command-line entry point: ``nilflow simulate | check | algebra-info``.

Exit codes: 0 pass, 1 check failed, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import checks
from .algebra import center, is_heisenberg_canonical, is_nonsingular
from .config import RunConfig, resolve
from .errors import ConfigError, NumericError
from .flow import conservation_report, integrate, sample_states, write_trajectory_csv
from .integrals import butler_predicate
from .symplectic import TangentState

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
CHECKS = ("involution", "integrals", "rank", "butler", "quotient", "isomorphism")


def _vector(text: str | None, dim: int, label: str) -> np.ndarray:
    if text is None:
        return np.zeros(dim)
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"{label}: {exc}") from exc
    if v.shape != (dim,):
        raise ConfigError(f"{label} needs {dim} comma-separated numbers")
    return v


def _emit(report: dict, out: str | None) -> None:
    text = checks.dumps(report)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _config(args) -> RunConfig:
    return resolve(args.group, args.n, args.metric, args.family, args.lattice, args.seed, args.samples, args.tol)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    a = cfg.algebra
    if args.y0 is None:
        raise ConfigError("simulate needs --y0")
    y0 = _vector(args.y0, a.dim, "--y0")
    p0 = _vector(args.p0, a.dim, "--p0")
    if not (args.T > 0 and args.dt > 0):
        raise ConfigError("--T and --dt must be positive")
    try:
        traj = integrate(a, TangentState(p0, y0), args.T, args.dt, args.method)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.csv:
        write_trajectory_csv(traj, args.csv)
    tol = cfg.tol if cfg.tol is not None else 1e-6
    report = checks.check_conservation(conservation_report(traj, cfg.family), tol)
    report.update(
        family=cfg.family_name,
        method=traj.method,
        dt=traj.dt,
        T=float(traj.times[-1]),
        steps=len(traj) - 1,
        final_p=traj.p[-1].tolist(),
        final_Y=traj.Y[-1].tolist(),
    )
    _emit(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_check(args) -> int:
    cfg = _config(args)
    a = cfg.algebra
    name = args.check
    tol = cfg.tol if cfg.tol is not None else checks.DEFAULT_TOL.get(name)
    if name == "butler":
        report = checks.check_butler(a, cfg.samples, cfg.seed)
    elif name == "quotient":
        if cfg.n is None or cfg.metric is not None:
            raise ConfigError("the quotient check needs group hn with the canonical metric")
        L = cfg.lattice or checks.LatticeSpec((1,) * cfg.n)
        states = sample_states(a, cfg.samples, cfg.seed, min_abs_yz=args.min_yz)
        variant = "Fprime" if cfg.family_name == "Fprime" else "F"
        report = checks.check_quotient(L, states, args.lattice_samples, cfg.seed, tol, variant)
    elif name == "isomorphism":
        if cfg.n is None or cfg.metric is not None:
            raise ConfigError("the isomorphism check needs group hn with the canonical metric")
        report = checks.check_isomorphism(a, sample_states(a, cfg.samples, cfg.seed), cfg.seed, tol)
    else:
        states = sample_states(a, cfg.samples, cfg.seed)
        if name == "involution":
            report = checks.check_involution(cfg.family, states, tol)
        elif name == "integrals":
            report = checks.check_integrals(cfg.family, states, tol)
        else:
            report = checks.check_rank(cfg.family, states, tol)
        report["family"] = cfg.family_name
    _emit(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_algebra_info(args) -> int:
    cfg = _config(args)
    a = cfg.algebra
    ns = is_nonsingular(a)
    bp = butler_predicate(a, samples=min(cfg.samples, 200), seed=cfg.seed)
    report = {
        "schema": checks.SCHEMA,
        "dim_v": a.dim_v,
        "dim_z": a.dim_z,
        "heisenberg_canonical": is_heisenberg_canonical(a),
        "standard_metric": a.is_standard_metric(),
        "center_dim": int(center(a).shape[1]),
        "nonsingular": ns.nonsingular,
        "singular_witness": None if ns.witness is None else ns.witness.tolist(),
        "butler_non_integrable": bp.non_integrable,
        "j_mats": a.j_mats.tolist(),
        "metric": a.metric.tolist(),
    }
    _emit(report, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="hn", help="'hn' or a path to an algebra JSON file")
    common.add_argument("--n", type=int, default=None, help="Heisenberg dimension parameter")
    common.add_argument("--metric", default="canonical", help="'canonical' or a metric JSON file")
    common.add_argument("--family", default="G", help="G, F, Fprime, quotient, basic, or a family JSON file")
    common.add_argument("--lattice", default=None, help="lattice JSON file")
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--out", default=None, help="JSON report path (stdout if omitted)")

    parser = argparse.ArgumentParser(prog="nilflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="integrate one geodesic")
    sim.add_argument("--y0", help="initial velocity, comma separated")
    sim.add_argument("--p0", help="initial point, comma separated (default identity)")
    sim.add_argument("--T", type=float, default=1.0)
    sim.add_argument("--dt", type=float, default=1e-3)
    sim.add_argument("--method", default="rk4", choices=["rk4", "exact-fiber"])
    sim.add_argument("--csv", default=None, help="trajectory CSV path")
    sim.set_defaults(func=cmd_simulate)

    chk = sub.add_parser("check", parents=[common], help="run a certification suite")
    chk.add_argument("check", choices=CHECKS)
    chk.add_argument("--lattice-samples", type=int, default=100)
    chk.add_argument("--min-yz", type=float, default=0.1, help="|Y_z| floor for quotient sampling")
    chk.set_defaults(func=cmd_check)

    info = sub.add_parser("algebra-info", parents=[common], help="describe the algebra")
    info.set_defaults(func=cmd_algebra_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
