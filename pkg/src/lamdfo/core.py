"""Shared types: solver configuration, step memory, trace rows and the
evaluation-counting objective wrapper."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Variant",
    "Driver",
    "MemoryMode",
    "StoppingRule",
    "SolverConfig",
    "CountingOracle",
    "BudgetExhausted",
    "StepMemory",
    "IterationRecord",
    "as_vector",
]


class Variant(str, enum.Enum):
    """Which extrapolation rule the linesearch uses."""

    STANDARD = "standard"
    NEW = "new"


class Driver(str, enum.Enum):
    """Outer iteration: chained exploration points or best-of-coordinates."""

    CHAINED = "chained"
    MODIFIED = "modified"


class MemoryMode(str, enum.Enum):
    """How tentative steps see step memories updated earlier in the same iteration.

    ``SNAPSHOT`` computes every tentative step from the memory as it was at the
    start of the iteration; ``INPLACE`` uses the partially updated memory.
    """

    SNAPSHOT = "snapshot"
    INPLACE = "inplace"


def as_vector(x, n: Optional[int] = None) -> np.ndarray:
    """Return `x` as a fresh 1-D float64 array, checking length and finiteness."""
    arr = np.array(x, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValueError("vector must have at least one entry")
    if n is not None and arr.size != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


@dataclass(frozen=True)
class StoppingRule:
    """Termination criteria. ``None`` disables a criterion.

    A budget of ``0`` is a real budget: the run stops before doing any work.
    """

    max_iterations: Optional[int] = 10_000
    max_evaluations: Optional[int] = 1_000_000
    step_tolerance: Optional[float] = 1e-8
    max_step: float = 1e10

    def __post_init__(self):
        if self.max_iterations is None and self.max_evaluations is None and not self.step_tolerance:
            raise ValueError("at least one stopping criterion must be active")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.max_evaluations is not None and self.max_evaluations < 0:
            raise ValueError("max_evaluations must be nonnegative")
        if self.step_tolerance is not None and self.step_tolerance < 0:
            raise ValueError("step_tolerance must be nonnegative")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the linesearch algorithm model.

    Parameters
    ----------
    c : float
        Coupling in the tentative step ``max(memory[i], c * max(memory))``, in (0, 1).
    theta : float
        Contraction applied to the tentative step after a failed linesearch, in (0, 1).
    gamma : float
        Sufficient-decrease coefficient, > 0.
    delta : float
        Extrapolation factor; each expansion divides the step by `delta`, in (0, 1).
    variant : Variant
        Standard or consecutive-point extrapolation test.
    driver : Driver
        Chained or modified outer iteration.
    alpha0 : float
        Initial step memory for every coordinate.
    stop : StoppingRule
    memory_mode : MemoryMode
        See :class:`MemoryMode`.
    """

    c: float = 0.5
    theta: float = 0.5
    gamma: float = 1e-6
    delta: float = 0.5
    variant: Variant = Variant.STANDARD
    driver: Driver = Driver.CHAINED
    alpha0: float = 1.0
    stop: StoppingRule = field(default_factory=StoppingRule)
    memory_mode: MemoryMode = MemoryMode.SNAPSHOT

    def __post_init__(self):
        # coerce strings so configs loaded from JSON/CLI work directly
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "driver", Driver(self.driver))
        object.__setattr__(self, "memory_mode", MemoryMode(self.memory_mode))
        if isinstance(self.stop, dict):
            object.__setattr__(self, "stop", StoppingRule(**self.stop))
        for name in ("c", "theta", "delta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        d["driver"] = self.driver.value
        d["memory_mode"] = self.memory_mode.value
        return d


class BudgetExhausted(Exception):
    """Raised by :class:`CountingOracle` when the evaluation budget is spent."""


class CountingOracle:
    """Wrap a black-box objective, counting every call to it.

    The value at the current incumbent (the chain point) is cached: asking
    for it again returns the stored value without a new call.  Non-finite
    objective values are counted but reported as ``None``, which every
    sufficient-decrease test treats as a rejection.

    Parameters
    ----------
    objective : callable
        Maps a 1-D float array to a real number.
    dim : int
        Problem dimension.
    max_evaluations : int, optional
        Hard budget; further calls raise :class:`BudgetExhausted`.
    """

    def __init__(self, objective: Callable[[np.ndarray], float], dim: int,
                 max_evaluations: Optional[int] = None):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.objective = objective
        self.dim = int(dim)
        self.max_evaluations = max_evaluations
        self.eval_count = 0
        self.failures = 0
        self._incumbent: Optional[tuple[np.ndarray, float]] = None

    def set_incumbent(self, x: np.ndarray, fx: float) -> None:
        self._incumbent = (np.array(x, dtype=np.float64), float(fx))

    @property
    def incumbent(self) -> Optional[tuple[np.ndarray, float]]:
        return self._incumbent

    @property
    def exhausted(self) -> bool:
        return self.max_evaluations is not None and self.eval_count >= self.max_evaluations

    def evaluate(self, x) -> Optional[float]:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.size != self.dim:
            raise ValueError(f"dimension mismatch: oracle has n={self.dim}, got shape {x.shape}")
        if self._incumbent is not None and np.array_equal(x, self._incumbent[0]):
            return self._incumbent[1]
        if self.exhausted:
            raise BudgetExhausted(self.eval_count)
        self.eval_count += 1
        value = float(self.objective(x.copy()))
        if not math.isfinite(value):
            self.failures += 1
            return None
        return value

    __call__ = evaluate


@dataclass
class StepMemory:
    """Per-coordinate step sizes and search-direction signs."""

    tilde_alpha: np.ndarray
    sign: np.ndarray

    def __post_init__(self):
        self.tilde_alpha = np.array(self.tilde_alpha, dtype=np.float64).reshape(-1)
        self.sign = np.array(self.sign, dtype=np.int64).reshape(-1)
        if self.tilde_alpha.shape != self.sign.shape:
            raise ValueError("tilde_alpha and sign must have equal length")
        if not np.all(self.tilde_alpha > 0):
            raise ValueError("step memory entries must be strictly positive")
        if not np.all(np.abs(self.sign) == 1):
            raise ValueError("sign entries must be +1 or -1")

    @classmethod
    def uniform(cls, n: int, alpha0: float) -> "StepMemory":
        return cls(np.full(n, float(alpha0)), np.ones(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.tilde_alpha.size

    def max(self) -> float:
        return float(self.tilde_alpha.max())

    def copy(self) -> "StepMemory":
        return StepMemory(self.tilde_alpha.copy(), self.sign.copy())


@dataclass(frozen=True)
class IterationRecord:
    """One row of the solver trace, describing iteration ``k``.

    ``f_x`` is the value at the iterate entering the iteration and ``f_next``
    at the iterate leaving it; ``max_tilde_alpha_prev`` and ``max_tilde_alpha``
    are the largest step memories before and after the update, and ``phi`` is
    the merit value at the end of the iteration.  ``complete`` is false only
    for a final iteration cut short by the evaluation budget.
    """

    k: int
    f_x: float
    f_next: float
    max_tilde_alpha_prev: float
    max_tilde_alpha: float
    phi: float
    success: bool
    successful_coords: frozenset
    expansions: tuple
    evals_iter: int
    evals_cum: int
    memory_uniform_prev: bool = False
    safety_stopped: bool = False
    complete: bool = True
    grad_norm: Optional[float] = None
