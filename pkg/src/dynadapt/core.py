"""
Shared building blocks: points, feasible domains, loss oracles,
environments and the online game loop.

Points are plain float64 numpy vectors of shape ``(d,)``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import ArgumentError, NumericError, ProtocolError

# distance tolerance for "point lies in the domain"
FEASIBILITY_TOL = 1e-9


def as_point(x, dimension: Optional[int] = None) -> np.ndarray:
    """Coerce ``x`` to a finite float64 vector, optionally checking its size."""
    p = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if p.ndim != 1:
        raise ArgumentError(f"point must be a vector, got shape {p.shape}")
    if dimension is not None and p.shape[0] != dimension:
        raise ArgumentError(f"expected dimension {dimension}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise NumericError(f"point has non-finite coordinates: {p}")
    return p


# ==============================================================
# Domains
# ==============================================================

class Domain(ABC):
    """A compact convex set containing the origin, with Euclidean projection."""

    dimension: int

    @property
    @abstractmethod
    def diameter(self) -> float: ...

    @abstractmethod
    def project(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def project_many(self, xs: np.ndarray) -> np.ndarray: ...

    def origin(self) -> np.ndarray:
        return np.zeros(self.dimension)

    def distance(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        return self.distance(x) <= tol

    @abstractmethod
    def describe(self) -> dict[str, Any]:
        """Flat description used by the trace header."""


class Box(Domain):
    """Axis-aligned box ``[lo, hi]^d``; projection clamps each coordinate."""

    def __init__(self, lo=0.0, hi=1.0, dimension: int = 1):
        lo_arr = np.broadcast_to(np.asarray(lo, dtype=np.float64), (dimension,)).copy()
        hi_arr = np.broadcast_to(np.asarray(hi, dtype=np.float64), (dimension,)).copy()
        if dimension < 1:
            raise ArgumentError("dimension must be >= 1")
        if np.any(lo_arr > 0.0) or np.any(hi_arr < 0.0):
            raise ArgumentError("box must contain the origin")
        if np.any(hi_arr <= lo_arr):
            raise ArgumentError("box must have positive width in every coordinate")
        self.lo, self.hi, self.dimension = lo_arr, hi_arr, dimension

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)

    def project_many(self, xs: np.ndarray) -> np.ndarray:
        return np.clip(xs, self.lo, self.hi)

    def describe(self) -> dict[str, Any]:
        return {"domain": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist(), "d": self.dimension}

    def __repr__(self) -> str:
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class Ball(Domain):
    """Euclidean ball of radius ``radius`` centred at the origin."""

    def __init__(self, radius: float = 1.0, dimension: int = 1):
        if radius <= 0:
            raise ArgumentError("radius must be positive")
        if dimension < 1:
            raise ArgumentError("dimension must be >= 1")
        self.radius, self.dimension = float(radius), dimension

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def project(self, x: np.ndarray) -> np.ndarray:
        n = float(np.linalg.norm(x))
        if n > self.radius:
            return x * (self.radius / n)
        return np.array(x, dtype=np.float64)

    def project_many(self, xs: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(xs, axis=1, keepdims=True)
        scale = np.where(norms > self.radius, self.radius / np.maximum(norms, 1e-300), 1.0)
        return xs * scale

    def describe(self) -> dict[str, Any]:
        return {"domain": "ball", "radius": self.radius, "d": self.dimension}

    def __repr__(self) -> str:
        return f"Ball(radius={self.radius}, d={self.dimension})"


# ==============================================================
# Loss oracles
# ==============================================================

class LossFunction(ABC):
    """First-order oracle for a convex loss with values in [0, 1] on its domain."""

    kind: str
    lipschitz: float

    @abstractmethod
    def value(self, w: np.ndarray) -> float: ...

    @abstractmethod
    def gradient(self, w: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def values(self, points: np.ndarray) -> np.ndarray:
        """Vectorised ``value`` over the rows of a ``(n, d)`` array."""

    @property
    @abstractmethod
    def params(self) -> np.ndarray:
        """Vector that, with the family constants, reconstructs the loss."""


class AbsoluteLoss(LossFunction):
    """``f(w) = ||w - theta||_2 / scale``; subgradient 0 at ``w = theta``."""

    kind = "absolute"

    def __init__(self, theta, scale: float = 1.0):
        if scale <= 0:
            raise ArgumentError("scale must be positive")
        self.theta = as_point(theta)
        self.scale = float(scale)
        self.lipschitz = 1.0 / self.scale

    def value(self, w: np.ndarray) -> float:
        return float(np.linalg.norm(w - self.theta)) / self.scale

    def gradient(self, w: np.ndarray) -> np.ndarray:
        diff = w - self.theta
        n = float(np.linalg.norm(diff))
        if n == 0.0:
            return np.zeros_like(diff)
        return diff / (n * self.scale)

    def values(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - self.theta, axis=1) / self.scale

    @property
    def params(self) -> np.ndarray:
        return self.theta

    def __repr__(self) -> str:
        return f"AbsoluteLoss(theta={self.theta.tolist()}, scale={self.scale})"


class LinearLoss(LossFunction):
    """``f(w) = (<g, w> + offset) / scale``."""

    kind = "linear"

    def __init__(self, g, offset: float, scale: float):
        if scale <= 0:
            raise ArgumentError("scale must be positive")
        self.g = as_point(g)
        self.offset = float(offset)
        self.scale = float(scale)
        self.lipschitz = float(np.linalg.norm(self.g)) / self.scale

    def value(self, w: np.ndarray) -> float:
        return (float(np.dot(self.g, w)) + self.offset) / self.scale

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return self.g / self.scale

    def values(self, points: np.ndarray) -> np.ndarray:
        return (points @ self.g + self.offset) / self.scale

    @property
    def params(self) -> np.ndarray:
        return self.g

    def __repr__(self) -> str:
        return f"LinearLoss(g={self.g.tolist()}, offset={self.offset}, scale={self.scale})"


# ==============================================================
# Environment
# ==============================================================

@dataclass(frozen=True)
class Environment:
    """A fixed, fully materialised loss sequence over a domain.

    Rounds are 1-indexed in the accessors, matching the game protocol.
    """

    domain: Domain
    losses: tuple[LossFunction, ...]
    lipschitz: float
    minimizers: Optional[np.ndarray] = None
    comparators: Optional[np.ndarray] = None
    kind: str = "custom"
    seed: Optional[int] = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.losses)

    def loss_at(self, t: int) -> LossFunction:
        if not 1 <= t <= self.horizon:
            raise ArgumentError(f"round {t} outside [1, {self.horizon}]")
        return self.losses[t - 1]

    def minimizer_at(self, t: int) -> Optional[np.ndarray]:
        if self.minimizers is None:
            return None
        return self.minimizers[t - 1]

    def comparator_at(self, t: int) -> Optional[np.ndarray]:
        if self.comparators is None:
            return None
        return self.comparators[t - 1]

    def with_losses(self, losses: Sequence[LossFunction],
                    minimizers: Optional[np.ndarray] = None) -> "Environment":
        return Environment(self.domain, tuple(losses), self.lipschitz, minimizers,
                           self.comparators, self.kind, self.seed, dict(self.meta))


# ==============================================================
# Learners and the game loop
# ==============================================================

@runtime_checkable
class OnlineLearner(Protocol):
    def act(self) -> np.ndarray: ...

    def observe(self, f: LossFunction) -> None: ...


@dataclass
class RunTrace:
    """Per-round record of one game.

    ``rounds`` holds learner-specific diagnostics (expert weights, actions)
    when the learner was built with ``record=True``.
    """

    actions: np.ndarray
    learner_losses: np.ndarray
    losses: list[LossFunction]
    domain: Domain
    lipschitz: float
    minimizers: Optional[np.ndarray] = None
    comparators: Optional[np.ndarray] = None
    n_active: Optional[np.ndarray] = None
    rounds: Optional[list[Any]] = None
    final_point: Optional[np.ndarray] = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.learner_losses)

    @property
    def diameter(self) -> float:
        return self.domain.diameter

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def cumulative_loss(self) -> float:
        return math.fsum(self.learner_losses)

    def window(self, r: int, s: int) -> "RunTrace":
        """Sub-trace over rounds ``r..s`` (1-indexed, inclusive)."""
        if not 1 <= r <= s <= self.horizon:
            raise ArgumentError(f"bad window [{r}, {s}] for horizon {self.horizon}")
        sl = slice(r - 1, s)
        pick = lambda a: None if a is None else a[sl]
        return RunTrace(self.actions[sl], self.learner_losses[sl], self.losses[sl],
                        self.domain, self.lipschitz, pick(self.minimizers),
                        pick(self.comparators), pick(self.n_active), None, None,
                        dict(self.meta))


def run_game(learner: OnlineLearner, env: Environment) -> RunTrace:
    """Play ``env.horizon`` rounds: act, reveal the loss, observe."""
    T = env.horizon
    if T < 1:
        raise ArgumentError("environment horizon must be >= 1")
    d = env.domain.dimension
    actions = np.empty((T, d))
    values = np.empty(T)
    n_active = np.zeros(T, dtype=np.int64)
    rounds: list[Any] = []
    for t in range(1, T + 1):
        w = as_point(learner.act(), d)
        gap = env.domain.distance(w)
        if gap > FEASIBILITY_TOL:
            raise ProtocolError(f"round {t}: action {w} lies {gap:.3g} outside the domain")
        f = env.loss_at(t)
        actions[t - 1] = w
        values[t - 1] = f.value(w)
        learner.observe(f)
        n_active[t - 1] = getattr(learner, "n_active", 1)
        info = getattr(learner, "round_info", None)
        if info is not None:
            rounds.append(info)
    final = getattr(learner, "current", None)
    return RunTrace(
        actions=actions,
        learner_losses=values,
        losses=list(env.losses),
        domain=env.domain,
        lipschitz=env.lipschitz,
        minimizers=env.minimizers,
        comparators=env.comparators,
        n_active=n_active,
        rounds=rounds or None,
        final_point=None if final is None else np.array(final, dtype=np.float64),
        meta={"kind": env.kind, "seed": env.seed, **env.meta},
    )
