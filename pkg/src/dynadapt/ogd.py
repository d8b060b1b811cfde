"""Projected online gradient descent with a fixed step size."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Domain, LossFunction, as_point
from .errors import ArgumentError, NumericError


@dataclass(frozen=True)
class OgdState:
    current: np.ndarray
    step_size: float
    domain: Domain

    def __post_init__(self):
        if not self.step_size > 0:
            raise ArgumentError(f"step size must be positive, got {self.step_size}")
        self.current.setflags(write=False)


def ogd_state(domain: Domain, step_size: float, initial=None) -> OgdState:
    start = domain.origin() if initial is None else domain.project(as_point(initial, domain.dimension))
    return OgdState(np.array(start, dtype=np.float64), float(step_size), domain)


def ogd_step(state: OgdState, f: LossFunction) -> OgdState:
    """One update ``w <- Proj[w - eta * grad f(w)]``; ``state`` is left untouched."""
    g = f.gradient(state.current)
    if not np.all(np.isfinite(g)):
        raise NumericError(f"non-finite gradient {g} at {state.current}")
    nxt = state.domain.project(state.current - state.step_size * g)
    return OgdState(np.array(nxt, dtype=np.float64), state.step_size, state.domain)


def static_step_size(diameter: float, lipschitz: float, horizon: int) -> float:
    """``D / (G sqrt(horizon))``, the step size that gives ``DG sqrt(T)`` static regret."""
    if diameter <= 0 or lipschitz <= 0:
        raise ArgumentError("diameter and Lipschitz bound must be positive")
    if horizon < 1:
        raise ArgumentError("horizon must be >= 1")
    return diameter / (lipschitz * math.sqrt(horizon))


class OGD:
    """Stand-alone OGD learner.

    ``step_size=None`` selects ``static_step_size(D, G, horizon)``.
    """

    n_active = 1

    def __init__(self, domain: Domain, lipschitz: float, horizon: Optional[int] = None,
                 step_size: Optional[float] = None, initial=None):
        if step_size is None:
            if horizon is None:
                raise ArgumentError("automatic step size needs the horizon")
            step_size = static_step_size(domain.diameter, lipschitz, horizon)
        self.state = ogd_state(domain, step_size, initial)

    @property
    def current(self) -> np.ndarray:
        return self.state.current

    @property
    def step_size(self) -> float:
        return self.state.step_size

    def act(self) -> np.ndarray:
        return self.state.current

    def observe(self, f: LossFunction) -> None:
        self.state = ogd_step(self.state, f)
