"""
Two-layer and three-layer learners that track both dynamic and adaptive regret.

``AOD``: one OGD expert per dense geometric covering (DGC) interval, each
warm-started from the expert it replaces, combined with AdaNormalHedge.
Needs the horizon up front.

``AOA``: one Ader expert per geometric covering (GC) interval, combined with
AdaNormalHedge. Horizon-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from .ader import Ader
from .anh import AnhRecord, combine_actions, normalize_weights
from .core import Domain, LossFunction
from .errors import ArgumentError, InvariantError, ProtocolError
from .intervals import Interval, dgc_starting_at, gc_starting_at, max_dgc_level
from .ogd import OgdState, ogd_state, ogd_step


@dataclass
class ExpertSlot:
    interval: Interval
    learner: Union[OgdState, Ader]
    record: AnhRecord = field(default_factory=AnhRecord)
    last_action: Optional[np.ndarray] = None

    @property
    def step_size(self) -> Optional[float]:
        return getattr(self.learner, "step_size", None)


@dataclass(frozen=True)
class RoundInfo:
    """Diagnostics of one round, kept when a learner runs with ``record=True``.

    Per-expert arrays follow the order of ``intervals`` (the experts whose
    actions were weighted this round).
    """

    t: int
    intervals: tuple[Interval, ...]
    weights: np.ndarray
    expert_actions: np.ndarray
    expert_losses: np.ndarray
    action: np.ndarray
    learner_loss: float
    created: tuple[Interval, ...] = ()
    removed: tuple[Interval, ...] = ()
    updated: tuple[Interval, ...] = ()
    warm_starts: tuple[tuple[Interval, Interval, np.ndarray], ...] = ()
    records: tuple[AnhRecord, ...] = ()


class _AnhCombiner:
    """Shared bookkeeping: weigh awake slots, play their average, log the round."""

    def __init__(self, record: bool):
        self.record = record
        self.t = 0
        self.round_info: Optional[RoundInfo] = None
        self._pending: Optional[dict[str, Any]] = None

    def _mix(self, slots: dict[Any, ExpertSlot]) -> np.ndarray:
        weights = normalize_weights({key: s.record for key, s in slots.items()})
        actions = {key: s.last_action for key, s in slots.items()}
        w = combine_actions(weights, actions)
        self._pending["weights"] = weights
        self._pending["action"] = w
        return w

    def _log(self, slots_seen: dict[Any, ExpertSlot], expert_losses: dict[Any, float],
             learner_loss: float, updated: list[Interval], removed: list[Interval]) -> None:
        if not self.record:
            self.round_info = None
            return
        keys = list(slots_seen)
        p = self._pending
        self.round_info = RoundInfo(
            t=self.t,
            intervals=tuple(slots_seen[k].interval for k in keys),
            weights=np.array([p["weights"][k] for k in keys]),
            expert_actions=np.stack([slots_seen[k].last_action for k in keys]),
            expert_losses=np.array([expert_losses[k] for k in keys]),
            action=p["action"],
            learner_loss=learner_loss,
            created=tuple(p["created"]),
            removed=tuple(removed),
            updated=tuple(updated),
            warm_starts=tuple(p.get("warm", ())),
            records=tuple(slots_seen[k].record for k in keys),
        )


class AOD(_AnhCombiner):
    """OGD experts on DGC intervals with warm starts, mixed by AdaNormalHedge.

    One expert per level ``k = 0..floor(log2 T)`` is awake in every round.
    When a level's interval ends, the expert for the next interval of that
    level starts from the retiring expert's current point, and the retiring
    expert is dropped before the round's weights are formed.
    """

    def __init__(self, domain: Domain, lipschitz: float, horizon: int,
                 initial=None, record: bool = False):
        super().__init__(record)
        if horizon < 1:
            raise ArgumentError("AOD needs a fixed horizon >= 1")
        if lipschitz <= 0:
            raise ArgumentError("Lipschitz bound must be positive")
        self.domain = domain
        self.lipschitz = float(lipschitz)
        self.horizon = horizon
        self.initial = initial
        self.slots: dict[int, ExpertSlot] = {}
        self._action: Optional[np.ndarray] = None

    @property
    def n_active(self) -> int:
        return len(self.slots)

    @property
    def n_levels(self) -> int:
        return max_dgc_level(self.horizon) + 1

    def step_size_for(self, interval: Interval) -> float:
        return self.domain.diameter / (self.lipschitz * math.sqrt(interval.length))

    def act(self) -> np.ndarray:
        if self._action is not None:
            return self._action
        t = self.t + 1
        if t > self.horizon:
            raise ProtocolError(f"AOD built for {self.horizon} rounds was asked for round {t}")
        created, warm = [], []
        for iv in dgc_starting_at(t, self.horizon):
            eta = self.step_size_for(iv)
            if t == 1:
                learner = ogd_state(self.domain, eta, self.initial)
            else:
                prev = self.slots.get(iv.level)
                if prev is None or prev.interval.end != t - 1:
                    raise InvariantError(f"no retiring level-{iv.level} expert at round {t}")
                learner = ogd_state(self.domain, eta, prev.learner.current)
                warm.append((iv, prev.interval, prev.learner.current))
            self.slots[iv.level] = ExpertSlot(iv, learner)
            created.append(iv)
        if len(self.slots) != self.n_levels:
            raise InvariantError(f"{len(self.slots)} awake experts, expected {self.n_levels}")
        for slot in self.slots.values():
            slot.last_action = slot.learner.current
        self._pending = {"created": created, "warm": warm}
        self._action = self._mix(self.slots)
        return self._action

    def observe(self, f: LossFunction) -> None:
        if self._action is None:
            self.act()
        self.t += 1
        learner_loss = f.value(self._action)
        expert_losses = {}
        for level, slot in self.slots.items():
            expert_losses[level] = f.value(slot.last_action)
            slot.record = slot.record.advance(learner_loss, expert_losses[level])
        seen = dict(self.slots)
        retired = [old for _, old, _ in self._pending["warm"]]
        self._log(seen, expert_losses, learner_loss, [s.interval for s in seen.values()], retired)
        for slot in self.slots.values():
            slot.learner = ogd_step(slot.learner, f)
        self._action = None


class AOA(_AnhCombiner):
    """Ader experts on GC intervals, mixed by AdaNormalHedge.

    An expert for interval ``I`` runs Ader with horizon ``|I|``. Experts whose
    interval ends at round ``t`` are dropped right after playing round ``t``,
    so their ``(R, C)`` never sees that round.
    """

    def __init__(self, domain: Domain, lipschitz: float, initial=None, record: bool = False,
                 horizon: Optional[int] = None):
        super().__init__(record)
        if lipschitz <= 0:
            raise ArgumentError("Lipschitz bound must be positive")
        self.domain = domain
        self.lipschitz = float(lipschitz)
        self.initial = initial
        # optional cap, only used to reject extra rounds
        self.horizon = horizon
        self.slots: dict[Interval, ExpertSlot] = {}
        self._action: Optional[np.ndarray] = None
        self._awake_count = 0

    @property
    def n_active(self) -> int:
        return self._awake_count

    def act(self) -> np.ndarray:
        if self._action is not None:
            return self._action
        t = self.t + 1
        if self.horizon is not None and t > self.horizon:
            raise ProtocolError(f"AOA capped at {self.horizon} rounds was asked for round {t}")
        created = []
        for iv in gc_starting_at(t):
            ader = Ader(self.domain, self.lipschitz, iv.length, self.initial)
            self.slots[iv] = ExpertSlot(iv, ader)
            created.append(iv)
        for slot in self.slots.values():
            slot.last_action = slot.learner.act()
        self._awake_count = len(self.slots)
        self._pending = {"created": created}
        self._action = self._mix(self.slots)
        return self._action

    def observe(self, f: LossFunction) -> None:
        if self._action is None:
            self.act()
        self.t += 1
        t = self.t
        learner_loss = f.value(self._action)
        seen = dict(self.slots)
        removed = [iv for iv in self.slots if iv.end == t]
        for iv in removed:
            del self.slots[iv]
        expert_losses = {iv: f.value(slot.last_action) for iv, slot in seen.items()}
        for iv, slot in self.slots.items():
            slot.record = slot.record.advance(learner_loss, expert_losses[iv])
            slot.learner.observe(f)
        self._log(seen, expert_losses, learner_loss, list(self.slots), removed)
        self._action = None
