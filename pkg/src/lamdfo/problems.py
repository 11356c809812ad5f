"""Smooth test problems with analytic gradients and gradient-Lipschitz constants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = ["TestProblem", "suite", "get_problem", "problem_names", "ROSENBROCK_BOX"]


@dataclass(frozen=True)
class TestProblem:
    """A named objective with the data needed to verify runs on it.

    ``lipschitz_box``, when set, means ``lipschitz_L`` is only valid on
    ``||x||_inf <= lipschitz_box``.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    dim: int
    objective: Callable[[np.ndarray], float]
    x0_default: np.ndarray
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz_L: Optional[float] = None
    f_min: Optional[float] = None
    lipschitz_box: Optional[float] = None

    def in_lipschitz_region(self, x) -> bool:
        if self.lipschitz_box is None:
            return True
        return bool(np.max(np.abs(x)) <= self.lipschitz_box)

    @property
    def verifiable(self) -> bool:
        return self.gradient is not None and self.lipschitz_L is not None


def _alternating_start(n: int) -> np.ndarray:
    # not on the dyadic grid reached from alpha0 = 1, so runs do not hit 0 exactly
    i = np.arange(n)
    return 0.7 * (i + 1) * (-1.0) ** i


def sphere(n: int) -> TestProblem:
    return TestProblem(
        name=f"sphere{n}",
        dim=n,
        objective=lambda x: float(x @ x),
        gradient=lambda x: 2.0 * x,
        lipschitz_L=2.0,
        f_min=0.0,
        x0_default=_alternating_start(n),
    )


def diag_quadratic(n: int) -> TestProblem:
    """``0.5 * sum_i i * x_i^2``; Hessian diag(1..n), so L = n."""
    w = np.arange(1, n + 1, dtype=np.float64)
    return TestProblem(
        name=f"diagquad{n}",
        dim=n,
        objective=lambda x: float(0.5 * np.sum(w * x * x)),
        gradient=lambda x: w * x,
        lipschitz_L=float(n),
        f_min=0.0,
        x0_default=_alternating_start(n),
    )


def _rosen(x):
    return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)


def _rosen_grad(x):
    return np.array([
        -400.0 * x[0] * (x[1] - x[0] ** 2) - 2.0 * (1.0 - x[0]),
        200.0 * (x[1] - x[0] ** 2),
    ])


ROSENBROCK_BOX = 3.0


def rosenbrock_local_lipschitz(box: float = ROSENBROCK_BOX, points: int = 601) -> float:
    """Largest Hessian spectral norm of Rosenbrock on a grid over ``[-box, box]^2``.

    The Hessian is ``[[1200 x1^2 - 400 x2 + 2, -400 x1], [-400 x1, 200]]``; the
    grid includes the corners, where the maximum is attained.
    """
    t = np.linspace(-box, box, points)
    x1, x2 = np.meshgrid(t, t, indexing="ij")
    a = 1200.0 * x1 ** 2 - 400.0 * x2 + 2.0
    b = -400.0 * x1
    d = 200.0
    mid = 0.5 * (a + d)
    rad = np.sqrt((0.5 * (a - d)) ** 2 + b ** 2)
    return float(np.max(np.maximum(np.abs(mid + rad), np.abs(mid - rad))))


def rosenbrock() -> TestProblem:
    return TestProblem(
        name="rosenbrock2",
        dim=2,
        objective=_rosen,
        gradient=_rosen_grad,
        lipschitz_L=rosenbrock_local_lipschitz(),
        f_min=0.0,
        x0_default=np.array([-1.2, 1.0]),
        lipschitz_box=ROSENBROCK_BOX,
    )


def pseudohuber(weights=(1.0, 10.0), scale: float = 1.0) -> TestProblem:
    """``sum_i w_i s^2 (sqrt(1 + (x_i/s)^2) - 1)``, a smoothed weighted l1 norm.

    Its Hessian is diagonal with entries ``w_i (1 + (x_i/s)^2)^(-3/2) <= w_i``,
    so L = max(w).
    """
    w = np.asarray(weights, dtype=np.float64)
    s2 = scale ** 2

    def f(x):
        return float(np.sum(w * s2 * (np.sqrt(1.0 + x * x / s2) - 1.0)))

    def g(x):
        return w * x / np.sqrt(1.0 + x * x / s2)

    return TestProblem(
        name=f"pseudohuber{w.size}",
        dim=w.size,
        objective=f,
        gradient=g,
        lipschitz_L=float(w.max()),
        f_min=0.0,
        x0_default=np.array([2.5, -1.5])[: w.size] if w.size <= 2 else _alternating_start(w.size),
    )


def suite() -> list[TestProblem]:
    problems = [sphere(n) for n in (1, 2, 4, 10)]
    problems += [diag_quadratic(n) for n in (2, 3, 5)]
    problems += [rosenbrock(), pseudohuber()]
    return problems


def problem_names() -> list[str]:
    return [p.name for p in suite()]


def get_problem(name: str) -> TestProblem:
    for p in suite():
        if p.name == name:
            return p
    raise KeyError(f"unknown problem {name!r}; available: {', '.join(problem_names())}")
