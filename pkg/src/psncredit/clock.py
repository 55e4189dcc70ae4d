"""Simulated clock: ticks advance only through explicit event processing."""

from __future__ import annotations


class SimClock:
    def __init__(self, start: int = 0):
        if start < 0:
            raise ValueError("clock cannot start before tick 0")
        self._now = start

    @property
    def now(self) -> int:
        return self._now

    def advance(self, ticks: int = 1) -> int:
        if ticks < 0:
            raise ValueError("clock never decreases")
        self._now += ticks
        return self._now

    def advance_to(self, tick: int) -> int:
        if tick < self._now:
            raise ValueError(f"cannot rewind clock from {self._now} to {tick}")
        self._now = tick
        return self._now
