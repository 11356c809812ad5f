"""Worst-case constants, bounds and per-iteration checkers.

Everything here is a pure function of a :class:`TheoryContext` and values
taken from a solver trace.  Nothing in this module is used by the solver
itself; it exists to verify runs against the known guarantees:

* gradient bound: ``||grad f(x_k)|| <= sqrt(n) * K * max(memory_{k+1})`` with
  ``K = (gamma + L(sqrt(n)+1)) / min(theta, delta)`` after a successful
  iteration and ``K = (gamma + L) / theta`` after a failed one;
* merit decrease: ``Phi_k = f(x_k) + c^2 gamma max(memory_k)^2 / 2`` drops by
  at least ``c_tilde * max(memory_k)^2`` every iteration;
* iteration and evaluation counts to reach ``||grad f|| <= eps`` are
  ``O(eps^-2)`` with the explicit constants below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import SolverConfig, StepMemory, Variant

__all__ = [
    "TheoryContext",
    "c1_constant",
    "c_tilde_constant",
    "lyapunov_phi",
    "gradient_bound_rhs",
    "check_gradient_bound",
    "failure_phi_constant",
    "check_phi_decrease",
    "iteration_bound",
    "iteration_bound_from_constants",
    "phi_star",
    "feval_bound",
    "feval_bound_from_constants",
]

GRADIENT_RELATIVE_SLACK = 1e-9
PHI_ABSOLUTE_SLACK = 1e-12


@dataclass(frozen=True)
class TheoryContext:
    n: int
    L: float
    gamma: float
    c: float
    theta: float
    delta: float
    f_min: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        for name in ("c", "theta", "delta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")

    @classmethod
    def from_config(cls, config: SolverConfig, n: int, L: float, f_min: float = 0.0,
                    f0: float | None = None) -> "TheoryContext":
        """Build a context for a run started with uniform memory ``config.alpha0``.

        ``phi0`` is the merit value at the start point when `f0` is given.
        """
        phi0 = 0.0
        if f0 is not None:
            phi0 = f0 + 0.5 * config.c ** 2 * config.gamma * config.alpha0 ** 2
        return cls(n=n, L=L, gamma=config.gamma, c=config.c, theta=config.theta,
                   delta=config.delta, f_min=f_min, phi0=phi0)

    def with_(self, **changes) -> "TheoryContext":
        return replace(self, **changes)


def _max_alpha(mem) -> float:
    if isinstance(mem, StepMemory):
        return mem.max()
    return float(np.max(mem))


def c1_constant(ctx: TheoryContext) -> float:
    success = (ctx.gamma + ctx.L * (math.sqrt(ctx.n) + 1.0)) / min(ctx.theta, ctx.delta)
    failure = (ctx.gamma + ctx.L) / ctx.theta
    return max(success, failure)


def c_tilde_constant(ctx: TheoryContext) -> float:
    return min(ctx.gamma * ctx.c ** 2, ctx.gamma * (1.0 - ctx.c ** 2 / 2.0))


def lyapunov_phi(f_x: float, mem, gamma: float, c: float) -> float:
    """Merit value ``f_x + c^2 gamma max(mem)^2 / 2``."""
    return f_x + 0.5 * c ** 2 * gamma * _max_alpha(mem) ** 2


def gradient_bound_rhs(ctx: TheoryContext, mem_next, success: bool) -> float:
    """Upper bound on ``||grad f(x_k)||`` given the memory after iteration k.

    `mem_next` may be a :class:`StepMemory`, an array of step sizes, or the
    maximum step size itself.
    """
    top = _max_alpha(mem_next)
    root_n = math.sqrt(ctx.n)
    if success:
        k = (ctx.gamma + ctx.L * (root_n + 1.0)) / min(ctx.theta, ctx.delta)
    else:
        k = (ctx.gamma + ctx.L) / ctx.theta
    return root_n * k * top


def check_gradient_bound(ctx: TheoryContext, grad, mem_next, success: bool) -> bool:
    norm = float(np.linalg.norm(np.asarray(grad, dtype=np.float64)))
    return norm <= gradient_bound_rhs(ctx, mem_next, success) * (1.0 + GRADIENT_RELATIVE_SLACK)


def failure_phi_constant(ctx: TheoryContext) -> float:
    """Guaranteed merit decrease per unit ``max(memory_k)^2`` after a failed iteration."""
    return 0.5 * ctx.c ** 2 * ctx.gamma * (1.0 - ctx.theta ** 2) / ctx.theta ** 2


def check_phi_decrease(ctx: TheoryContext, phi_k: float, phi_prev: float, mem_k,
                       success: bool) -> bool:
    """Check the merit drop from iteration k-1 to k.

    `mem_k` is the memory at iteration k (after the update made in k-1) and
    `success` says whether iteration k-1 moved the iterate.
    """
    top = _max_alpha(mem_k)
    const = c_tilde_constant(ctx) if success else failure_phi_constant(ctx)
    return phi_k - phi_prev <= -const * top ** 2 + PHI_ABSOLUTE_SLACK


def _check_eps(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def iteration_bound_from_constants(n: int, c1: float, c_tilde: float, phi_gap: float,
                                   epsilon: float) -> int:
    """``ceil(n c1^2 phi_gap / c_tilde * epsilon^-2)``."""
    _check_eps(epsilon)
    return math.ceil(n * c1 ** 2 * phi_gap / c_tilde * epsilon ** -2)


def iteration_bound(ctx: TheoryContext, epsilon: float) -> int:
    """Worst-case number of iterations before ``||grad f(x_k)|| <= epsilon``."""
    return iteration_bound_from_constants(ctx.n, c1_constant(ctx), c_tilde_constant(ctx),
                                          ctx.phi0 - ctx.f_min, epsilon)


def phi_star(delta: float) -> float:
    """``max(1, max_{a >= 0} (a + 1) delta^(2a))``.

    The unconstrained maximizer is ``a* = (-2 ln d - 1) / (2 ln d)``; when it
    is negative the maximum over ``a >= 0`` is attained at ``a = 0``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    ln_d = math.log(delta)
    a_star = (-2.0 * ln_d - 1.0) / (2.0 * ln_d)
    if a_star < 0:
        return 1.0
    value = -1.0 / (2.0 * ln_d) * delta ** (-2.0 - 1.0 / ln_d)
    return max(1.0, value)


def feval_bound_from_constants(n: int, c1: float, c_tilde: float, phi_gap: float,
                               f_gap: float, epsilon: float, variant, c: float,
                               gamma: float, delta: float) -> int:
    if f_gap < 0:
        raise ValueError("objective gap must be nonnegative")
    unsuccessful = 2 * n * iteration_bound_from_constants(n, c1, c_tilde, phi_gap, epsilon)
    if Variant(variant) is Variant.NEW:
        extra = n * c1 ** 2 * f_gap / (gamma * c ** 2 * epsilon ** 2) * delta ** 2 / (1.0 - delta) ** 2
    else:
        extra = phi_star(delta) * n * c1 ** 2 * f_gap / (c ** 2 * gamma) * epsilon ** -2
    return unsuccessful + math.ceil(extra)


def feval_bound(ctx: TheoryContext, epsilon: float, variant, f0_minus_fbar: float) -> int:
    """Worst-case evaluations before ``||grad f(x_k)|| <= epsilon``.

    `f0_minus_fbar` stands in for the decrease achieved by the hitting
    iteration; ``f(x0) - f_min`` is a computable upper bound for it.
    """
    return feval_bound_from_constants(ctx.n, c1_constant(ctx), c_tilde_constant(ctx),
                                      ctx.phi0 - ctx.f_min, f0_minus_fbar, epsilon, variant,
                                      ctx.c, ctx.gamma, ctx.delta)
