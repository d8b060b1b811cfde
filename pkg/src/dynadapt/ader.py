"""
Ader: OGD experts on a geometric grid of step sizes, mixed by Hedge with a
non-uniform prior that favours small step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Domain, LossFunction
from .errors import ArgumentError, ProtocolError
from .ogd import OgdState, ogd_state, ogd_step


@dataclass(frozen=True)
class StepSizeGrid:
    etas: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.etas)


def grid_size(horizon: int) -> int:
    return math.ceil(0.5 * math.log2(1.0 + 4.0 * horizon / 7.0)) + 1


def build_grid(diameter: float, lipschitz: float, horizon: int) -> StepSizeGrid:
    """``eta_i = 2^(i-1) (D/G) sqrt(7 / (2T))`` for ``i = 1..N``."""
    if diameter <= 0 or lipschitz <= 0:
        raise ArgumentError("diameter and Lipschitz bound must be positive")
    if horizon < 1:
        raise ArgumentError("horizon must be >= 1")
    base = diameter / lipschitz * math.sqrt(7.0 / (2.0 * horizon))
    return StepSizeGrid(tuple(2.0 ** i * base for i in range(grid_size(horizon))))


def prior_weights(n: int) -> np.ndarray:
    """``p_i = (1 + 1/n) / (i (i+1))``; telescopes to exactly 1."""
    if n < 1:
        raise ArgumentError("need at least one expert")
    i = np.arange(1, n + 1, dtype=np.float64)
    return (1.0 + 1.0 / n) / (i * (i + 1.0))


def hedge_update(weights: Sequence[float], expert_losses: Sequence[float], alpha: float) -> np.ndarray:
    """``p' ∝ p * exp(-alpha * loss)``, normalised in log space."""
    if alpha <= 0:
        raise ArgumentError("alpha must be positive")
    p = np.asarray(weights, dtype=np.float64)
    losses = np.asarray(expert_losses, dtype=np.float64)
    if p.shape != losses.shape:
        raise ArgumentError("weights and losses differ in length")
    with np.errstate(divide="ignore"):
        logp = np.log(p) - alpha * losses
    logp -= logp.max()
    q = np.exp(logp)
    return q / q.sum()


class Ader:
    """Ader for a known horizon; the learner plays the Hedge mixture of its experts.

    Hedge weights are carried as log-weights (log prior minus alpha times
    cumulative loss) so they stay representable for long horizons.
    """

    def __init__(self, domain: Domain, lipschitz: float, horizon: int, initial=None):
        if horizon < 1:
            raise ArgumentError("horizon must be >= 1")
        self.domain = domain
        self.horizon = horizon
        self.grid = build_grid(domain.diameter, lipschitz, horizon)
        self.alpha = math.sqrt(8.0 / horizon)
        self.experts: list[OgdState] = [ogd_state(domain, eta, initial) for eta in self.grid.etas]
        self.prior = prior_weights(self.grid.size)
        self._log_w = np.log(self.prior)
        self.weights = self.prior.copy()
        self.t = 0
        self._stack: Optional[np.ndarray] = None

    @property
    def n_active(self) -> int:
        return len(self.experts)

    def expert_actions(self) -> np.ndarray:
        if self._stack is None:
            self._stack = np.stack([e.current for e in self.experts])
        return self._stack

    def act(self) -> np.ndarray:
        if self.t >= self.horizon:
            raise ProtocolError(f"Ader built for {self.horizon} rounds was asked for round {self.t + 1}")
        w = self.weights @ self.expert_actions()
        # a convex combination can drift off the set by rounding only
        return self.domain.project(w)

    def observe(self, f: LossFunction) -> None:
        if self.t >= self.horizon:
            raise ProtocolError("Ader observed a loss beyond its horizon")
        losses = f.values(self.expert_actions())
        self._log_w = self._log_w - self.alpha * losses
        shifted = np.exp(self._log_w - self._log_w.max())
        self.weights = shifted / shifted.sum()
        self.experts = [ogd_step(e, f) for e in self.experts]
        self._stack = None
        self.t += 1

    def step(self, f: LossFunction) -> np.ndarray:
        """Play one round against ``f`` and return the action taken."""
        w = self.act()
        self.observe(f)
        return w
