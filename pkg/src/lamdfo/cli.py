"""Command line front end.

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import harness
from .core import SolverConfig, StoppingRule
from .problems import get_problem, problem_names

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2

# flag name -> SolverConfig field
_CONFIG_FLAGS = {"c": "c", "theta": "theta", "gamma": "gamma", "delta": "delta",
                 "alpha0": "alpha0", "variant": "variant", "driver": "driver",
                 "memory_mode": "memory_mode"}
_STOP_FLAGS = {"max_iters": "max_iterations", "max_evals": "max_evaluations",
               "step_tol": "step_tolerance", "max_step": "max_step"}


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True, help="one of: " + ", ".join(problem_names()))
    p.add_argument("--config", help="JSON file with SolverConfig fields; flags override it")
    p.add_argument("--variant", choices=["standard", "new"])
    p.add_argument("--driver", choices=["chained", "modified"])
    p.add_argument("--memory-mode", choices=["snapshot", "inplace"])
    p.add_argument("--c", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--max-evals", type=int)
    p.add_argument("--step-tol", type=float)
    p.add_argument("--max-step", type=float)
    p.add_argument("--x0", type=_floats, help="comma-separated start point")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lamdfo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("solve", help="run one solve, write trace.csv and result.json"))

    p = sub.add_parser("sweep", help="hitting times vs worst-case bounds over epsilons")
    _add_common(p)
    p.add_argument("--eps", type=float, action="append", required=True,
                   help="tolerance in (0, 1); repeat for several")

    _add_common(sub.add_parser("verify", help="check every iteration against the bounds"))

    p = sub.add_parser("envelope", help="export the two sufficient-decrease envelopes")
    p.add_argument("--problem", required=True)
    p.add_argument("--x", type=_floats, help="base point (default: the problem start point)")
    p.add_argument("--d", type=_floats, help="direction (default: -e_1)")
    p.add_argument("--abar", type=float, required=True)
    p.add_argument("--gamma", type=float, default=SolverConfig.gamma)
    p.add_argument("--alpha-start", type=float, default=0.0)
    p.add_argument("--alpha-stop", type=float, required=True)
    p.add_argument("--alpha-step", type=float, required=True)
    p.add_argument("--out", required=True, help="output CSV file")
    return parser


def config_from_args(args) -> SolverConfig:
    values: dict = {}
    stop: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        stop.update(loaded.pop("stop", {}) or {})
        values.update(loaded)
    for flag, name in _CONFIG_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    for flag, name in _STOP_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            stop[name] = v
    try:
        return SolverConfig(stop=StoppingRule(**stop), **values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _problem(name):
    try:
        return get_problem(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc


def _x0(args, problem):
    if args.x0 is None:
        return None
    if len(args.x0) != problem.dim:
        raise UsageError(f"--x0 has {len(args.x0)} entries, problem dimension is {problem.dim}")
    return np.array(args.x0)


def _cmd_solve(args) -> int:
    problem = _problem(args.problem)
    result = harness.run_solve(problem, config_from_args(args), args.out, _x0(args, problem))
    print(f"{problem.name}: {result.status.value} after {result.iterations} iterations, "
          f"{result.evaluations} evaluations, f = {result.f_final:.6g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    problem = _problem(args.problem)
    if problem.gradient is None:
        raise UsageError(f"problem {problem.name} has no gradient")
    try:
        res = harness.run_sweep(problem, config_from_args(args), args.eps, args.out,
                                _x0(args, problem))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ok = True
    for row in res.rows:
        within = row.within_bounds
        ok &= within
        print(f"eps={row.epsilon:g} hit={row.hitting_iteration} evals={row.hitting_evaluations} "
              f"bound_iter={row.bound_iterations} bound_evals={row.bound_evaluations} "
              f"{'ok' if within else 'VIOLATED'}")
    print(f"slope_fit={res.slope_fit}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_verify(args) -> int:
    problem = _problem(args.problem)
    report = harness.run_verify(problem, config_from_args(args), args.out, x0=_x0(args, problem))
    if report.status == "unverifiable":
        print(f"{problem.name}: unverifiable ({report.message})")
        return EXIT_USAGE
    for name, c in report.counts.items():
        print(f"{name}: pass={c['pass']} fail={c['fail']} skip={c['skip']} n/a={c['n/a']}")
    print(f"{problem.name}: {report.status}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_envelope(args) -> int:
    problem = _problem(args.problem)
    x = np.array(args.x) if args.x is not None else problem.x0_default
    if args.d is not None:
        d = np.array(args.d)
    else:
        d = np.zeros(problem.dim)
        d[0] = -1.0
    if x.size != problem.dim or d.size != problem.dim:
        raise UsageError("--x and --d must match the problem dimension")
    try:
        grid = harness.alpha_grid(args.alpha_start, args.alpha_stop, args.alpha_step)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = harness.export_envelopes(problem, x, d, args.abar, args.gamma, grid, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


_COMMANDS = {"solve": _cmd_solve, "sweep": _cmd_sweep, "verify": _cmd_verify,
             "envelope": _cmd_envelope}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
