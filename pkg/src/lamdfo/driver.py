"""Outer iteration of the linesearch algorithm model.

Two drivers are provided.  The chained driver runs the coordinate
linesearches one after the other, each starting where the previous one
ended.  The modified driver starts every linesearch from the current iterate
and moves to the best end point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import (
    BudgetExhausted,
    CountingOracle,
    Driver,
    IterationRecord,
    MemoryMode,
    SolverConfig,
    StepMemory,
    as_vector,
)
from .linesearch import LinesearchResult, df_linesearch, trial_point

__all__ = [
    "Status",
    "SolveResult",
    "LAMSolver",
    "tentative_step",
    "update_memory",
    "iterate_chained",
    "iterate_modified",
    "solve",
]


class Status(str, enum.Enum):
    STEP_TOLERANCE = "StepToleranceReached"
    ITERATION_BUDGET = "IterationBudget"
    EVALUATION_BUDGET = "EvaluationBudget"


@dataclass
class SolveResult:
    x_final: np.ndarray
    f_final: float
    iterations: int
    evaluations: int
    status: Status
    trace: list = field(default_factory=list)


def tentative_step(mem: StepMemory, i: int, c: float, reference_max: Optional[float] = None) -> float:
    """Return ``max(mem[i], c * max_j mem[j])``.

    `reference_max` replaces ``max_j mem[j]`` when the caller holds the
    maximum of a memory snapshot taken at the start of the iteration.
    """
    top = mem.max() if reference_max is None else reference_max
    return max(float(mem.tilde_alpha[i]), c * top)


def update_memory(mem: StepMemory, i: int, abar: float, result: LinesearchResult,
                  theta: float) -> StepMemory:
    """Contract coordinate `i` on failure, store the accepted step on success.

    Mutates and returns `mem`.
    """
    if result.alpha > 0:
        mem.tilde_alpha[i] = result.alpha
    else:
        mem.tilde_alpha[i] = theta * abar
    mem.sign[i] = result.sign_out
    return mem


class _Sweep:
    """Bookkeeping shared by both drivers for one outer iteration."""

    def __init__(self, x, f_x, mem, oracle, config):
        self.n = x.size
        self.start_evals = oracle.eval_count
        self.max_prev = mem.max()
        self.uniform_prev = bool(np.all(mem.tilde_alpha == mem.tilde_alpha[0]))
        self.snapshot = config.memory_mode is MemoryMode.SNAPSHOT
        self.expansions = [0] * self.n
        self.successful: list[int] = []
        self.safety_stopped = False
        self.complete = True

    def abar(self, mem, i, c):
        return tentative_step(mem, i, c, self.max_prev if self.snapshot else None)

    def record(self, k, f_x, f_next, mem, oracle, config) -> IterationRecord:
        top = mem.max()
        return IterationRecord(
            k=k,
            f_x=f_x,
            f_next=f_next,
            max_tilde_alpha_prev=self.max_prev,
            max_tilde_alpha=top,
            phi=f_next + 0.5 * config.c ** 2 * config.gamma * top ** 2,
            success=bool(self.successful),
            successful_coords=frozenset(self.successful),
            expansions=tuple(self.expansions),
            evals_iter=oracle.eval_count - self.start_evals,
            evals_cum=oracle.eval_count,
            memory_uniform_prev=self.uniform_prev,
            safety_stopped=self.safety_stopped,
            complete=self.complete,
        )


def _run_coordinate(sweep, i, y, f_y, mem, oracle, config):
    """Linesearch along coordinate `i` and memory update; None if the budget ran out."""
    abar = sweep.abar(mem, i, config.c)
    try:
        res = df_linesearch(config.variant, oracle, y, f_y, i, int(mem.sign[i]), abar, config)
    except BudgetExhausted:
        sweep.complete = False
        return None
    update_memory(mem, i, abar, res, config.theta)
    if res.alpha > 0:
        sweep.successful.append(i)
        sweep.expansions[i] = res.expansions
    sweep.safety_stopped |= res.safety_stopped
    if res.truncated:
        sweep.complete = False
    return res


def iterate_chained(x: np.ndarray, f_x: float, mem: StepMemory, oracle: CountingOracle,
                    config: SolverConfig, k: int = 0):
    """One chained iteration: coordinate `i` starts from the end point of `i-1`.

    Returns ``(x_next, f_next, mem, record)``; `mem` is updated in place.
    """
    sweep = _Sweep(x, f_x, mem, oracle, config)
    y, f_y = x, f_x
    for i in range(sweep.n):
        res = _run_coordinate(sweep, i, y, f_y, mem, oracle, config)
        if res is None:
            break
        if res.alpha > 0:
            y = trial_point(y, i, res.alpha * res.sign_out)
            f_y = res.f_end
            oracle.set_incumbent(y, f_y)
        if not sweep.complete:
            break
    return y, f_y, mem, sweep.record(k, f_x, f_y, mem, oracle, config)


def iterate_modified(x: np.ndarray, f_x: float, mem: StepMemory, oracle: CountingOracle,
                     config: SolverConfig, k: int = 0):
    """One modified iteration: every linesearch starts at `x`; keep the best end point.

    Ties go to the smallest coordinate index.  No extra evaluations are spent
    choosing the winner.
    """
    sweep = _Sweep(x, f_x, mem, oracle, config)
    candidates = []
    for i in range(sweep.n):
        res = _run_coordinate(sweep, i, x, f_x, mem, oracle, config)
        if res is None:
            break
        if res.alpha > 0:
            candidates.append((trial_point(x, i, res.alpha * res.sign_out), res.f_end))
        else:
            candidates.append((x, f_x))
        if not sweep.complete:
            break
    best_x, best_f = x, f_x
    if candidates:
        best_x, best_f = min(candidates, key=lambda cand: cand[1])
    oracle.set_incumbent(best_x, best_f)
    return best_x, best_f, mem, sweep.record(k, f_x, best_f, mem, oracle, config)


class LAMSolver:
    """Stateful solver exposing one outer iteration at a time.

    Useful when something has to watch the iterates from outside, e.g. a
    gradient-norm probe that must not touch the evaluation counter.

    Parameters
    ----------
    x0 : array_like
    objective : callable or CountingOracle
    config : SolverConfig, optional
    """

    def __init__(self, x0, objective, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        x0 = as_vector(x0)
        stop = self.config.stop
        if isinstance(objective, CountingOracle):
            self.oracle = objective
            if self.oracle.dim != x0.size:
                raise ValueError(f"dimension mismatch: oracle n={self.oracle.dim}, x0 n={x0.size}")
        else:
            self.oracle = CountingOracle(objective, x0.size)
        if stop.max_evaluations is not None:
            self.oracle.max_evaluations = stop.max_evaluations
        self.x = x0
        self.memory = StepMemory.uniform(x0.size, self.config.alpha0)
        self.k = 0
        self.trace: list[IterationRecord] = []
        self._halted = False
        if self.oracle.exhausted:
            self.f_x = self.f0 = float("nan")
            self._halted = True
            return
        f0 = self.oracle.evaluate(x0)
        if f0 is None:
            raise ValueError("objective is not finite at the starting point")
        self.f_x = f0
        self.oracle.set_incumbent(x0, f0)
        self.f0 = f0

    @property
    def n(self) -> int:
        return self.x.size

    def stop_status(self) -> Optional[Status]:
        """Status of the first stopping rule that fires, else ``None``."""
        stop = self.config.stop
        if self._halted:
            return Status.EVALUATION_BUDGET
        if stop.step_tolerance is not None and self.memory.max() <= stop.step_tolerance:
            return Status.STEP_TOLERANCE
        if stop.max_iterations is not None and self.k >= stop.max_iterations:
            return Status.ITERATION_BUDGET
        if self.oracle.exhausted:
            return Status.EVALUATION_BUDGET
        return None

    def step(self) -> IterationRecord:
        iterate = iterate_modified if self.config.driver is Driver.MODIFIED else iterate_chained
        x, f, _, rec = iterate(self.x, self.f_x, self.memory, self.oracle, self.config, self.k)
        self.x, self.f_x = x, f
        self.k += 1
        self.trace.append(rec)
        if not rec.complete:
            self._halted = True
        return rec

    def result(self, status: Status) -> SolveResult:
        return SolveResult(self.x.copy(), self.f_x, self.k, self.oracle.eval_count, status,
                           list(self.trace))


def solve(x0, objective, config: Optional[SolverConfig] = None,
          gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> SolveResult:
    """Minimize `objective` from `x0` until a stopping rule fires.

    If `gradient` is given, each trace row carries ``||grad f(x_k)||``;
    the gradient is only observed, never used by the method, and its calls are
    not counted as evaluations.
    """
    solver = LAMSolver(x0, objective, config)
    while (status := solver.stop_status()) is None:
        gnorm = None if gradient is None else float(np.linalg.norm(gradient(solver.x.copy())))
        rec = solver.step()
        if gnorm is not None:
            solver.trace[-1] = replace(rec, grad_norm=gnorm)
    return solver.result(status)
