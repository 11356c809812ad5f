"""Experiment runners: single solves, epsilon sweeps, verification runs and
envelope export.  Results go to flat CSV/JSON files."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import theory
from .core import SolverConfig
from .driver import LAMSolver, SolveResult, solve
from .problems import TestProblem, get_problem

__all__ = [
    "TRACE_COLUMNS",
    "ENVELOPE_COLUMNS",
    "SweepRow",
    "SweepResult",
    "VerificationReport",
    "run_solve",
    "run_sweep",
    "run_verify",
    "export_envelopes",
    "envelope_rows",
    "write_trace_csv",
    "summary_dict",
]

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("k", "f_x", "max_tilde_alpha", "phi", "success", "evals_cum", "grad_norm",
                 "bound_rhs")
ENVELOPE_COLUMNS = ("alpha", "f_along_line", "classical_envelope", "new_envelope")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _resolve(problem) -> TestProblem:
    return problem if isinstance(problem, TestProblem) else get_problem(problem)


def _context(problem: TestProblem, config: SolverConfig, f0: float) -> Optional[theory.TheoryContext]:
    if problem.lipschitz_L is None:
        return None
    return theory.TheoryContext.from_config(config, problem.dim, problem.lipschitz_L,
                                            problem.f_min if problem.f_min is not None else 0.0, f0)


def write_trace_csv(path, result: SolveResult, problem: TestProblem, config: SolverConfig) -> None:
    ctx = _context(problem, config, result.trace[0].f_x) if result.trace else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in result.trace:
            rhs = None
            if ctx is not None:
                rhs = theory.gradient_bound_rhs(ctx, rec.max_tilde_alpha, rec.success)
            writer.writerow([_fmt(v) for v in (rec.k, rec.f_x, rec.max_tilde_alpha, rec.phi,
                                               rec.success, rec.evals_cum, rec.grad_norm, rhs)])


def summary_dict(problem_name: str, config: SolverConfig, result: SolveResult) -> dict:
    f_final = result.f_final
    return {
        "problem": problem_name,
        "config": config.to_dict(),
        "status": result.status.value,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "f_final": None if math.isnan(f_final) else f_final,
        "x_final": [float(v) for v in result.x_final],
    }


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def run_solve(problem, config: Optional[SolverConfig] = None, out_dir=None,
              x0=None) -> SolveResult:
    """Solve a suite problem and optionally write ``trace.csv`` and ``result.json``."""
    problem = _resolve(problem)
    config = config or SolverConfig()
    start = problem.x0_default if x0 is None else x0
    result = solve(start, problem.objective, config, gradient=problem.gradient)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trace_csv(out / "trace.csv", result, problem, config)
        _write_json(out / "result.json", summary_dict(problem.name, config, result))
    return result


# -- epsilon sweep -----------------------------------------------------------

@dataclass
class SweepRow:
    epsilon: float
    hitting_iteration: Optional[int]
    hitting_evaluations: Optional[int]
    bound_iterations: int
    bound_evaluations: int

    @property
    def within_bounds(self) -> bool:
        return (self.hitting_iteration is not None
                and self.hitting_iteration <= self.bound_iterations
                and self.hitting_evaluations <= self.bound_evaluations)


@dataclass
class SweepResult:
    problem: str
    config: dict
    rows: list = field(default_factory=list)
    slope_fit: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "config": self.config,
            "rows": [vars(r) for r in self.rows],
            "slope_fit": self.slope_fit,
        }


def hitting_time(problem: TestProblem, config: SolverConfig, epsilon: float, x0=None):
    """First k with ``||grad f(x_k)|| <= epsilon`` and the evaluations spent to reach x_k.

    Returns ``(None, evaluations)`` if a stopping rule fires first.  The
    gradient is computed outside the counting oracle.
    """
    solver = LAMSolver(problem.x0_default if x0 is None else x0, problem.objective, config)
    while True:
        if np.linalg.norm(problem.gradient(solver.x.copy())) <= epsilon:
            return solver.k, solver.oracle.eval_count
        if solver.stop_status() is not None:
            return None, solver.oracle.eval_count
        solver.step()


def slope_fit(epsilons: Sequence[float], hits: Sequence[Optional[int]]) -> Optional[float]:
    """Least-squares slope of ``log(hit)`` against ``log(1/eps)``.

    Rows with no hit or a zero hit are left out; fewer than two usable points
    (or a single distinct epsilon) give ``None``.
    """
    pts = [(math.log(1.0 / e), math.log(h)) for e, h in zip(epsilons, hits) if h]
    if len({p[0] for p in pts}) < 2:
        return None
    xs, ys = np.array(pts).T
    return float(np.polyfit(xs, ys, 1)[0])


def run_sweep(problem, config: Optional[SolverConfig] = None, epsilons: Iterable[float] = (),
              out_dir=None, x0=None) -> SweepResult:
    """Measure hitting times for each epsilon and compare them with the worst-case bounds."""
    problem = _resolve(problem)
    if problem.gradient is None:
        raise ValueError(f"problem {problem.name} has no gradient; cannot detect hitting times")
    config = config or SolverConfig()
    epsilons = sorted({float(e) for e in epsilons}, reverse=True)
    if not epsilons:
        raise ValueError("at least one epsilon is required")
    for e in epsilons:
        if not 0.0 < e < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {e}")
    start = problem.x0_default if x0 is None else np.asarray(x0, dtype=np.float64)
    f0 = problem.objective(start.copy())
    ctx = _context(problem, config, f0)
    f_gap = f0 - (problem.f_min if problem.f_min is not None else 0.0)
    result = SweepResult(problem.name, config.to_dict())
    for eps in epsilons:
        hit, evals = hitting_time(problem, config, eps, start)
        if ctx is None:
            bi = be = None
        else:
            bi = theory.iteration_bound(ctx, eps)
            be = theory.feval_bound(ctx, eps, config.variant, f_gap)
        log.info("eps=%g hit=%s evals=%s bounds=(%s, %s)", eps, hit, evals, bi, be)
        result.rows.append(SweepRow(eps, hit, evals if hit is not None else None, bi, be))
    result.slope_fit = slope_fit([r.epsilon for r in result.rows],
                                 [r.hitting_iteration for r in result.rows])
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "sweep.json", result.to_dict())
    return result


# -- verification --------------------------------------------------------------

CHECKS = ("gradient_bound", "phi_decrease", "failure_contraction", "failure_evals")


@dataclass
class VerificationReport:
    problem: str
    status: str  # "pass", "fail" or "unverifiable"
    iterations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"problem": self.problem, "status": self.status, "message": self.message,
                "counts": self.counts, "iterations": self.iterations}


def run_verify(problem, config: Optional[SolverConfig] = None, out_dir=None,
               checker_context: Optional[theory.TheoryContext] = None,
               x0=None) -> VerificationReport:
    """Solve and check every iteration against the theoretical guarantees.

    Per iteration k the report holds ``pass``, ``fail``, ``skip`` or ``n/a``
    for: the gradient bound at ``x_k``, the merit decrease into ``x_{k+1}``,
    memory contraction by ``theta`` after a failed iteration, and exactly
    ``2n`` evaluations in a failed iteration.  `checker_context` overrides the
    constants used by the checkers (negative controls).
    """
    problem = _resolve(problem)
    config = config or SolverConfig()
    if not problem.verifiable:
        report = VerificationReport(problem.name, "unverifiable",
                                    message="problem lacks an analytic gradient or Lipschitz constant")
        _maybe_write_report(out_dir, report)
        return report
    solver = LAMSolver(problem.x0_default if x0 is None else x0, problem.objective, config)
    ctx = checker_context or _context(problem, config, solver.f_x)
    n = problem.dim
    rows = []
    counts = {name: {"pass": 0, "fail": 0, "skip": 0, "n/a": 0} for name in CHECKS}
    phi_prev = theory.lyapunov_phi(solver.f_x, solver.memory, ctx.gamma, ctx.c)
    while solver.stop_status() is None:
        x_k = solver.x.copy()
        grad = problem.gradient(x_k.copy())
        rec = solver.step()
        row = {"k": rec.k}
        if not rec.complete:
            row.update({name: "skip" for name in CHECKS})
        else:
            if problem.in_lipschitz_region(x_k):
                ok = theory.check_gradient_bound(ctx, grad, rec.max_tilde_alpha, rec.success)
                row["gradient_bound"] = "pass" if ok else "fail"
            else:
                row["gradient_bound"] = "skip"
            phi_k = theory.lyapunov_phi(rec.f_next, rec.max_tilde_alpha, ctx.gamma, ctx.c)
            ok = theory.check_phi_decrease(ctx, phi_k, phi_prev, rec.max_tilde_alpha, rec.success)
            row["phi_decrease"] = "pass" if ok else "fail"
            if rec.success:
                row["failure_contraction"] = row["failure_evals"] = "n/a"
            else:
                ok = rec.max_tilde_alpha <= ctx.theta * rec.max_tilde_alpha_prev
                row["failure_contraction"] = "pass" if ok else "fail"
                row["failure_evals"] = "pass" if rec.evals_iter == 2 * n else "fail"
            phi_prev = phi_k
        for name in CHECKS:
            counts[name][row[name]] += 1
        rows.append(row)
    failed = any(c["fail"] for c in counts.values())
    report = VerificationReport(problem.name, "fail" if failed else "pass", rows, counts)
    _maybe_write_report(out_dir, report)
    return report


def _maybe_write_report(out_dir, report: VerificationReport) -> None:
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify.json", report.to_dict())


# -- envelopes -------------------------------------------------------------------

def envelope_rows(objective, x, d, abar: float, gamma: float, alphas: Sequence[float]):
    """Objective along ``x + alpha*d`` next to both sufficient-decrease envelopes.

    The classical envelope is ``f(x) - gamma*alpha^2``; the consecutive-point
    one is ``f(x + abar*d) - gamma*(alpha - abar)^2``.
    """
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    f_x = float(objective(x.copy()))
    f_bar = float(objective(x + abar * d))
    rows = []
    for a in alphas:
        a = float(a)
        rows.append((a, float(objective(x + a * d)), f_x - gamma * a ** 2,
                     f_bar - gamma * (a - abar) ** 2))
    return rows


def alpha_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid ``start, start+step, ...`` built by index to avoid drift."""
    if not step > 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid stop must not precede start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + j * step for j in range(count)]


def export_envelopes(problem, x, d, abar: float, gamma: float, alphas: Sequence[float],
                     out_path=None):
    problem = _resolve(problem)
    alphas = list(alphas)
    if not alphas:
        raise ValueError("alpha grid must be nonempty")
    rows = envelope_rows(problem.objective, x, d, abar, gamma, alphas)
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(ENVELOPE_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    return rows
