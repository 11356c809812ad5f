"""Derivative-free coordinate linesearches with extrapolation.

Both procedures share the same probe: try ``y + abar*s*e_i`` and then
``y - abar*s*e_i`` against the sufficient-decrease test
``f(trial) <= f(y) - gamma*abar**2``.  They differ in how an accepted step is
expanded:

* standard: keep dividing the step by ``delta`` while the expanded point
  still achieves sufficient decrease with respect to ``f(y)``;
* new: keep dividing while the expanded point improves on the *previous
  accepted point* by ``gamma*((1/delta - 1)*alpha)**2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BudgetExhausted, CountingOracle, SolverConfig, Variant

__all__ = [
    "LinesearchResult",
    "probe",
    "extrapolate_standard",
    "extrapolate_new",
    "df_linesearch",
    "trial_point",
]


@dataclass(frozen=True)
class LinesearchResult:
    """Outcome of one coordinate linesearch.

    ``alpha == 0`` encodes failure.  ``evals_used`` counts only the
    evaluations made by the call that produced this result.  ``f_end`` is the
    value at ``y + alpha*sign_out*e_i`` (``None`` on failure).
    ``safety_stopped`` means the extrapolation hit ``max_step`` and
    ``truncated`` that the evaluation budget ran out during extrapolation; in
    both cases the last test was never evaluated.
    """

    alpha: float
    sign_out: int
    expansions: int
    evals_used: int
    f_end: Optional[float]
    safety_stopped: bool = False
    truncated: bool = False

    @property
    def success(self) -> bool:
        return self.alpha > 0


def trial_point(y: np.ndarray, i: int, step: float) -> np.ndarray:
    z = y.copy()
    z[i] = y[i] + step
    return z


def _passes(value: Optional[float], reference: float) -> bool:
    return value is not None and value <= reference


def _evaluate_trial(oracle, y, i, step):
    z = trial_point(y, i, step)
    if z[i] == y[i]:
        # step below one ulp of y[i]: nothing moves, so nothing can be accepted
        return None
    return oracle.evaluate(z)


def probe(oracle: CountingOracle, y: np.ndarray, f_y: float, i: int, sign_in: int,
          abar: float, gamma: float) -> Optional[tuple[int, float]]:
    """Test both signs of the coordinate direction at step `abar`.

    Returns ``(sign, f_trial)`` for the first sign satisfying sufficient
    decrease, or ``None`` if neither does.  Uses one evaluation when the
    stored sign is accepted, two otherwise.
    """
    reference = f_y - gamma * abar ** 2
    for s in (sign_in, -sign_in):
        value = _evaluate_trial(oracle, y, i, abar * s)
        if _passes(value, reference):
            return s, value
    return None


def _extrapolate(oracle, y, f_y, i, sign, abar, f_trial, gamma, delta, max_step, consecutive):
    alpha = abar
    f_last = f_trial
    expansions = 0
    evals = 0
    shrink = 1.0 / delta - 1.0
    while True:
        nxt = alpha / delta
        if nxt > max_step:
            return LinesearchResult(alpha, sign, expansions, evals, f_last, safety_stopped=True)
        if consecutive:
            reference = f_last - gamma * (shrink * alpha) ** 2
        else:
            reference = f_y - gamma * nxt ** 2
        try:
            value = _evaluate_trial(oracle, y, i, nxt * sign)
        except BudgetExhausted:
            return LinesearchResult(alpha, sign, expansions, evals, f_last, truncated=True)
        evals += 1
        if not _passes(value, reference):
            return LinesearchResult(alpha, sign, expansions, evals, f_last)
        alpha = nxt
        f_last = value
        expansions += 1


def extrapolate_standard(oracle: CountingOracle, y: np.ndarray, f_y: float, i: int, sign: int,
                         abar: float, gamma: float, delta: float, max_step: float,
                         f_trial: float) -> LinesearchResult:
    """Expand an accepted step while ``f(y + a/delta) <= f(y) - gamma*(a/delta)**2``.

    `f_trial` is the value at ``y + abar*sign*e_i`` returned by :func:`probe`.
    ``evals_used`` in the result counts loop evaluations only.
    """
    return _extrapolate(oracle, y, f_y, i, sign, abar, f_trial, gamma, delta, max_step,
                        consecutive=False)


def extrapolate_new(oracle: CountingOracle, y: np.ndarray, f_y: float, i: int, sign: int,
                    abar: float, gamma: float, delta: float, max_step: float,
                    f_trial: float) -> LinesearchResult:
    """Expand while each new point improves on the last accepted one.

    The test is ``f(y + a/delta) <= f(y + a) - gamma*((1/delta - 1)*a)**2``,
    where ``f(y + a)`` is carried over from the previous accepted test rather
    than recomputed.
    """
    return _extrapolate(oracle, y, f_y, i, sign, abar, f_trial, gamma, delta, max_step,
                        consecutive=True)


def df_linesearch(variant, oracle: CountingOracle, y: np.ndarray, f_y: float, i: int,
                  sign_in: int, abar: float, config: SolverConfig) -> LinesearchResult:
    """Probe coordinate `i` from `y` and extrapolate on success.

    On failure the input sign is returned unchanged with ``alpha = 0``.
    :class:`BudgetExhausted` raised during the probe propagates to the caller.
    """
    if not abar > 0:
        raise ValueError("tentative step must be positive")
    start = oracle.eval_count
    accepted = probe(oracle, y, f_y, i, sign_in, abar, config.gamma)
    if accepted is None:
        return LinesearchResult(0.0, sign_in, 0, oracle.eval_count - start, None)
    sign, f_trial = accepted
    extrapolate = extrapolate_new if Variant(variant) is Variant.NEW else extrapolate_standard
    res = extrapolate(oracle, y, f_y, i, sign, abar, config.gamma, config.delta,
                      config.stop.max_step, f_trial)
    return LinesearchResult(res.alpha, res.sign_out, res.expansions, oracle.eval_count - start,
                            res.f_end, res.safety_stopped, res.truncated)
