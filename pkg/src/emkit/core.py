"""Generic fixed-point EM driver.

A model is any object exposing ``e_step``, ``m_step``, ``log_likelihood`` and
``validate`` (see :class:`EmModel`). :func:`run_em` alternates the two steps,
records the observed-data log-likelihood after every M-step and aborts if it
ever decreases by more than ``EmConfig.monotonicity_slack``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, List, Protocol

from .errors import ConstraintViolation, DegenerateInput, NumericalFailure

__all__ = [
    "EmModel",
    "EmConfig",
    "StopReason",
    "TraceEntry",
    "EmTrace",
    "EmResult",
    "run_em",
    "assert_monotone",
]


class EmModel(Protocol):
    def e_step(self, params: Any, data: Any) -> Any: ...

    def m_step(self, stats: Any, data: Any) -> Any: ...

    def log_likelihood(self, params: Any, data: Any) -> float: ...

    def validate(self, params: Any, data: Any) -> None:
        """Raise ConstraintViolation if ``params`` is outside the parameter space."""


class StopReason(str, Enum):
    TOLERANCE_MET = "tolerance_met"
    MAX_ITERATIONS = "max_iterations"
    DEGENERATE_INPUT = "degenerate_input"


@dataclass(frozen=True)
class EmConfig:
    max_iterations: int = 10000
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    monotonicity_slack: float = 1e-10

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        for name in ("rel_tol", "abs_tol", "monotonicity_slack"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    params: Any
    loglik: float


@dataclass
class EmTrace:
    iterations: List[TraceEntry] = field(default_factory=list)
    converged: bool = False
    stop_reason: StopReason = StopReason.MAX_ITERATIONS

    @property
    def logliks(self) -> List[float]:
        return [e.loglik for e in self.iterations]

    def __len__(self):
        return len(self.iterations)


@dataclass
class EmResult:
    final_params: Any
    trace: EmTrace

    @property
    def n_iterations(self) -> int:
        """Number of completed E/M cycles."""
        return len(self.trace) - 1


def assert_monotone(trace, slack: float = 1e-10) -> bool:
    """True iff no successive log-likelihood difference is below ``-slack``.

    ``trace`` may be an :class:`EmTrace` or a plain sequence of floats.
    """
    values = trace.logliks if isinstance(trace, EmTrace) else list(trace)
    return all(b - a >= -slack for a, b in zip(values, values[1:]))


def _loglik(model, params, data, iteration):
    value = float(model.log_likelihood(params, data))
    if not math.isfinite(value):
        raise NumericalFailure(
            f"non-finite log-likelihood {value} at iteration {iteration}", iteration=iteration
        )
    return value


def _settled(delta, prev_delta, ll, config):
    """Convergence test on the log-likelihood gain ``delta`` of the last cycle.

    Under linear convergence with ratio ``r = delta / prev_delta`` the gain still
    to come is about ``delta / (1 - r)``; the relative tolerance is applied to
    that projection so slowly converging runs are not cut short.
    """
    gain = abs(delta)
    if gain < config.abs_tol:
        return True
    if prev_delta is not None and prev_delta > 0 and 0 < delta < prev_delta:
        gain = delta / (1.0 - delta / prev_delta)
    return gain < config.rel_tol * abs(ll)


def run_em(model: EmModel, data, init, config: EmConfig | None = None) -> EmResult:
    """Iterate E- and M-steps from ``init`` until the log-likelihood settles.

    Stops when the change in log-likelihood is below ``abs_tol``, when the
    change (projected over the remaining iterations when the gains shrink
    geometrically) is below ``rel_tol`` relative to the previous value, or
    after ``max_iterations`` cycles. Models may define ``is_degenerate(data)``;
    if it returns true the run stops immediately with
    ``StopReason.DEGENERATE_INPUT``.

    Raises
    ------
    ConstraintViolation
        ``init`` fails ``model.validate``.
    NumericalFailure
        Non-finite log-likelihood, or a decrease larger than the slack.
    """
    config = config or EmConfig()
    if data is None:
        raise DegenerateInput("no data supplied")
    model.validate(init, data)

    trace = EmTrace()
    params = init
    ll = _loglik(model, params, data, 0)
    trace.iterations.append(TraceEntry(0, params, ll))

    is_degenerate = getattr(model, "is_degenerate", None)
    if is_degenerate is not None and is_degenerate(data):
        trace.stop_reason = StopReason.DEGENERATE_INPUT
        return EmResult(params, trace)

    prev_delta = None
    for it in range(1, config.max_iterations + 1):
        stats = model.e_step(params, data)
        params = model.m_step(stats, data)
        new_ll = _loglik(model, params, data, it)
        trace.iterations.append(TraceEntry(it, params, new_ll))

        delta = new_ll - ll
        if delta < -config.monotonicity_slack:
            raise NumericalFailure(
                f"log-likelihood decreased by {-delta:.3e} at iteration {it}", iteration=it
            )
        if _settled(delta, prev_delta, ll, config):
            trace.converged = True
            trace.stop_reason = StopReason.TOLERANCE_MET
            break
        ll, prev_delta = new_ll, delta
    else:
        trace.stop_reason = StopReason.MAX_ITERATIONS

    return EmResult(params, trace)


def check_simplex(vec, name="parameter", tol=1e-9):
    """Raise ConstraintViolation unless ``vec`` is a probability vector."""
    values = [float(v) for v in vec]
    if any(not math.isfinite(v) or v < -tol for v in values):
        raise ConstraintViolation(f"{name} has negative or non-finite entries: {values}")
    total = math.fsum(values)
    if abs(total - 1.0) > tol:
        raise ConstraintViolation(f"{name} sums to {total!r}, expected 1")
