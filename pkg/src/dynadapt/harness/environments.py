"""
Synthetic environments.

=================== ======================================================
kind                losses
=================== ======================================================
stationary          ``||w - theta||_2 / D`` with a fixed ``theta``
abrupt              same, ``theta`` piecewise constant over segments
drift               same, ``theta_t = (1 + sin(2 pi t / T)) / 2`` per coord
adversarial-linear  ``(<g_t, w> + D) / (2 D)`` on a ball, random unit ``g_t``
=================== ======================================================

The absolute-loss families live on ``[0, 1]^d`` (``D = sqrt(d)``,
``G = 1 / D``). The linear family lives on the ball of radius ``radius``
(``D = 2 radius``, ``G = 1 / (2 D)``), where its values stay in ``[1/4, 3/4]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..core import AbsoluteLoss, Ball, Box, Environment, LinearLoss
from ..errors import ConfigError

ENVIRONMENTS = ("stationary", "abrupt", "drift", "adversarial-linear")


@dataclass
class EnvironmentSpec:
    kind: str
    horizon: int
    seed: int = 0
    dimension: int = 1
    segments: int = 4
    values: Optional[list[float]] = None
    change_points: Optional[list[int]] = None
    theta: Optional[list[float]] = None
    radius: float = 1.0
    extra: dict = field(default_factory=dict)


def _abs_env(kind: str, thetas: np.ndarray, spec: EnvironmentSpec, meta: dict) -> Environment:
    box = Box(0.0, 1.0, spec.dimension)
    D = box.diameter
    losses = tuple(AbsoluteLoss(th, D) for th in thetas)
    return Environment(box, losses, 1.0 / D, minimizers=np.array(thetas, dtype=np.float64),
                       kind=kind, seed=spec.seed, meta=meta)


def segment_bounds(horizon: int, segments: int,
                   change_points: Optional[Sequence[int]] = None) -> list[tuple[int, int]]:
    """Round ranges of the segments; ``change_points`` are first rounds of segments 2, 3, ..."""
    if change_points:
        starts = [1] + sorted(int(c) for c in change_points)
        if starts[1] <= 1 or starts[-1] > horizon or len(set(starts)) != len(starts):
            raise ConfigError(f"change points {change_points} invalid for horizon {horizon}")
    else:
        if not 1 <= segments <= horizon:
            raise ConfigError(f"need 1 <= segments <= horizon, got {segments}")
        starts = [j * horizon // segments + 1 for j in range(segments)]
    ends = [s - 1 for s in starts[1:]] + [horizon]
    return list(zip(starts, ends))


def build_environment(spec: EnvironmentSpec) -> Environment:
    T, d = spec.horizon, spec.dimension
    if T < 1:
        raise ConfigError("horizon must be >= 1")
    if d < 1:
        raise ConfigError("dimension must be >= 1")
    rng = np.random.default_rng(spec.seed)

    if spec.kind == "stationary":
        theta = np.asarray(spec.theta if spec.theta is not None else rng.uniform(0, 1, d), dtype=np.float64)
        theta = np.broadcast_to(theta, (d,))
        if np.any((theta < 0) | (theta > 1)):
            raise ConfigError("theta must lie in [0, 1]")
        return _abs_env("stationary", np.tile(theta, (T, 1)), spec, {})

    if spec.kind == "abrupt":
        bounds = segment_bounds(T, spec.segments, spec.change_points)
        m = len(bounds)
        if spec.values is not None:
            vals = np.asarray(spec.values, dtype=np.float64)
            if vals.size == m:
                vals = np.repeat(vals[:, None], d, axis=1)
            elif vals.size == m * d:
                vals = vals.reshape(m, d)
            else:
                raise ConfigError(f"{vals.size} segment values for {m} segments in dimension {d}")
            if np.any((vals < 0) | (vals > 1)):
                raise ConfigError("segment values must lie in [0, 1]")
        else:
            vals = rng.uniform(0.0, 1.0, (m, d))
        thetas = np.empty((T, d))
        for (a, b), v in zip(bounds, vals):
            thetas[a - 1:b] = v
        return _abs_env("abrupt", thetas, spec, {"segments": bounds})

    if spec.kind == "drift":
        t = np.arange(1, T + 1, dtype=np.float64)
        col = (1.0 + np.sin(2.0 * math.pi * t / T)) / 2.0
        return _abs_env("drift", np.repeat(col[:, None], d, axis=1), spec, {})

    if spec.kind == "adversarial-linear":
        if spec.radius <= 0:
            raise ConfigError("radius must be positive")
        ball = Ball(spec.radius, d)
        D = ball.diameter
        g = rng.standard_normal((T, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        losses = tuple(LinearLoss(gt, D, 2.0 * D) for gt in g)
        return Environment(ball, losses, 1.0 / (2.0 * D), minimizers=-spec.radius * g,
                           kind="adversarial-linear", seed=spec.seed)

    raise ConfigError(f"unknown environment {spec.kind!r}; expected one of {', '.join(ENVIRONMENTS)}")
