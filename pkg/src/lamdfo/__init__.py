"""Derivative-free coordinate linesearch methods with worst-case verification tools."""

from .core import (
    BudgetExhausted,
    CountingOracle,
    Driver,
    IterationRecord,
    MemoryMode,
    SolverConfig,
    StepMemory,
    StoppingRule,
    Variant,
)
from .driver import LAMSolver, SolveResult, Status, solve
from .linesearch import LinesearchResult, df_linesearch
from .problems import TestProblem, get_problem, suite

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "CountingOracle",
    "Driver",
    "IterationRecord",
    "LAMSolver",
    "LinesearchResult",
    "MemoryMode",
    "SolveResult",
    "SolverConfig",
    "Status",
    "StepMemory",
    "StoppingRule",
    "TestProblem",
    "Variant",
    "df_linesearch",
    "get_problem",
    "solve",
    "suite",
]
