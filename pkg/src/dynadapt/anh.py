"""
AdaNormalHedge weights for sleeping experts.

Each expert carries a pair ``(R, C)``: its cumulative regret and cumulative
absolute regret since it woke up. The weight of an awake expert is
``w(R, C) = (Phi(R+1, C+1) - Phi(R-1, C+1)) / 2`` with
``Phi(R, C) = exp([R]_+^2 / (3C))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping, TypeVar

import numpy as np

from .errors import ArgumentError, NumericError

K = TypeVar("K", bound=Hashable)

# exp() overflows float64 just above 709.78
_MAX_DIRECT_EXPONENT = 700.0


@dataclass(frozen=True)
class AnhRecord:
    R: float = 0.0
    C: float = 0.0

    def advance(self, meta_loss: float, expert_loss: float) -> "AnhRecord":
        r = meta_loss - expert_loss
        return AnhRecord(self.R + r, self.C + abs(r))


def _exponent(R: float, C: float) -> float:
    if C < 0:
        raise ArgumentError(f"C must be non-negative, got {C}")
    pos = max(R, 0.0)
    if C == 0:
        if pos != 0.0:
            raise ArgumentError("potential undefined for C = 0 with R > 0")
        return 0.0
    return pos * pos / (3.0 * C)


def potential(R: float, C: float) -> float:
    """``Phi(R, C)``, with ``Phi(0, 0) = 1``."""
    try:
        return math.exp(_exponent(R, C))
    except OverflowError:
        raise NumericError(f"Phi({R}, {C}) overflows; use log_anh_weight") from None


def anh_weight(R: float, C: float) -> float:
    return 0.5 * (potential(R + 1.0, C + 1.0) - potential(R - 1.0, C + 1.0))


def log_anh_weight(R: float, C: float) -> float:
    """``log w(R, C)`` without forming ``Phi``; ``-inf`` when the weight is 0."""
    a = _exponent(R + 1.0, C + 1.0)
    b = _exponent(R - 1.0, C + 1.0)
    if a <= b:
        return -math.inf
    return math.log(0.5) + a + math.log(-math.expm1(b - a))


def normalize_weights(records: Mapping[K, AnhRecord]) -> dict[K, float]:
    """Probabilities proportional to ``w(R, C)`` over the awake experts.

    Uses the literal weight formula while every exponent is representable,
    otherwise normalises in log space. All-zero weights give the uniform
    distribution.
    """
    if not records:
        raise ArgumentError("no awake experts to weight")
    keys = list(records)
    top = max(_exponent(records[k].R + 1.0, records[k].C + 1.0) for k in keys)
    if top <= _MAX_DIRECT_EXPONENT:
        raw = [anh_weight(records[k].R, records[k].C) for k in keys]
    else:
        logs = [log_anh_weight(records[k].R, records[k].C) for k in keys]
        peak = max(logs)
        raw = [0.0 if lw == -math.inf else math.exp(lw - peak) for lw in logs]
    total = math.fsum(raw)
    if not math.isfinite(total):
        raise NumericError(f"weight total is {total}")
    if total == 0.0:
        return {k: 1.0 / len(keys) for k in keys}
    return {k: x / total for k, x in zip(keys, raw)}


def combine_actions(weights: Mapping[K, float], actions: Mapping[K, np.ndarray]) -> np.ndarray:
    """Weighted average of expert actions, summed with correct rounding per coordinate."""
    if weights.keys() != actions.keys():
        raise ArgumentError("weights and actions refer to different experts")
    keys = list(weights)
    if len(keys) == 1:
        return np.array(actions[keys[0]], dtype=np.float64)
    stacked = np.stack([np.asarray(actions[k], dtype=np.float64) for k in keys])
    p = np.array([weights[k] for k in keys])
    terms = p[:, None] * stacked
    return np.array([math.fsum(terms[:, j]) for j in range(stacked.shape[1])])
