"""
Geometric covering interval systems.

Two systems over the positive integers (rounds):

* GC  -- level ``k`` holds ``[i*2^k, (i+1)*2^k - 1]`` for ``i >= 1``; it
  partitions ``N \\ {1, ..., 2^k - 1}``. Generated lazily, no horizon.
* DGC -- level ``k`` holds ``[(i-1)*2^k + 1, i*2^k]`` for ``i >= 1``; it
  partitions all of ``N``. Only levels with ``2^k <= T`` exist.

Removing the intervals that contain round 1 from DGC leaves exactly the GC
system shifted right by one round.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .errors import ArgumentError


class System(str, enum.Enum):
    DGC = "dgc"
    GC = "gc"


@dataclass(frozen=True, order=True)
class Interval:
    """Closed round range ``[start, start + 2^level - 1]``."""

    start: int
    level: int

    def __post_init__(self):
        if self.start < 1 or self.level < 0:
            raise ArgumentError(f"invalid interval start={self.start} level={self.level}")

    @property
    def length(self) -> int:
        return 1 << self.level

    @property
    def end(self) -> int:
        return self.start + self.length - 1

    def __contains__(self, t: int) -> bool:
        return self.start <= t <= self.end

    def as_tuple(self) -> tuple[int, int]:
        return (self.start, self.end)

    def __str__(self) -> str:
        return f"[{self.start},{self.end}]"


def _two_adic(n: int) -> int:
    """Largest k with 2^k dividing n (n >= 1)."""
    return (n & -n).bit_length() - 1


def max_dgc_level(horizon: int) -> int:
    if horizon < 1:
        raise ArgumentError("horizon must be >= 1")
    return horizon.bit_length() - 1


def is_member(interval: Interval, system: System | str, horizon: Optional[int] = None) -> bool:
    system = System(system)
    k, a = interval.level, interval.start
    if system is System.GC:
        return a % (1 << k) == 0
    if horizon is None:
        raise ArgumentError("DGC membership needs a horizon")
    return (a - 1) % (1 << k) == 0 and (1 << k) <= horizon


def dgc_starting_at(t: int, horizon: int) -> list[Interval]:
    """DGC intervals whose first round is ``t``, shortest first."""
    if t < 1:
        raise ArgumentError(f"round must be >= 1, got {t}")
    if t > horizon:
        raise ArgumentError(f"round {t} beyond horizon {horizon}")
    top = max_dgc_level(horizon)
    if t == 1:
        return [Interval(1, k) for k in range(top + 1)]
    return [Interval(t, k) for k in range(min(_two_adic(t - 1), top) + 1)]


def gc_starting_at(t: int) -> list[Interval]:
    """GC intervals whose first round is ``t``, shortest first."""
    if t < 1:
        raise ArgumentError(f"round must be >= 1, got {t}")
    return [Interval(t, k) for k in range(_two_adic(t) + 1)]


def dgc_containing(t: int, horizon: int) -> list[Interval]:
    if not 1 <= t <= horizon:
        raise ArgumentError(f"round {t} outside [1, {horizon}]")
    return [Interval(((t - 1) >> k << k) + 1, k) for k in range(max_dgc_level(horizon) + 1)]


def gc_containing(t: int) -> list[Interval]:
    if t < 1:
        raise ArgumentError(f"round must be >= 1, got {t}")
    return [Interval(t >> k << k, k) for k in range(t.bit_length())]


def cover(r: int, s: int, system: System | str, horizon: Optional[int] = None) -> list[Interval]:
    """Tile ``[r, s]`` with system intervals of growing-then-shrinking length.

    Greedy: at each position take the longest interval of the system that
    starts there and ends by ``s``. Lengths strictly double until the
    remaining span becomes the binding constraint, after which they strictly
    halve. Starting at round 1 under DGC the first pick is already the
    longest, which is what repeatedly merging ``[1,1]`` into the cover of
    ``[2, s]`` produces.
    """
    system = System(system)
    if r < 1:
        raise ArgumentError(f"cover start must be >= 1, got {r}")
    if r > s:
        raise ArgumentError(f"empty range [{r}, {s}]")
    top = None
    if system is System.DGC:
        if horizon is None:
            raise ArgumentError("DGC cover needs a horizon")
        if s > horizon:
            raise ArgumentError(f"range end {s} beyond horizon {horizon}")
        top = max_dgc_level(horizon)

    out: list[Interval] = []
    x = r
    while x <= s:
        fit = (s - x + 1).bit_length() - 1
        if system is System.GC:
            align = _two_adic(x)
        else:
            align = top if x == 1 else min(_two_adic(x - 1), top)
        out.append(Interval(x, min(fit, align)))
        x = out[-1].end + 1
    return out


def split_cover(seq: list[Interval]) -> tuple[list[Interval], list[Interval]]:
    """Split a cover into its growing part ``I_-p..I_0`` and shrinking part ``I_1..I_q``.

    ``I_0`` is the first interval of maximal length.
    """
    if not seq:
        return [], []
    peak = max(iv.level for iv in seq)
    i0 = next(i for i, iv in enumerate(seq) if iv.level == peak)
    return seq[: i0 + 1], seq[i0 + 1:]


def satisfies_halving(seq: list[Interval]) -> bool:
    """Check both length-ratio conditions for some split of ``seq``."""
    for i0 in range(len(seq)):
        left, right = seq[: i0 + 1], seq[i0 + 1:]
        grow = all(2 * left[j].length <= left[j + 1].length for j in range(len(left) - 1))
        shrink = all(2 * right[j + 1].length <= right[j].length for j in range(len(right) - 1))
        if grow and shrink:
            return True
    return False
