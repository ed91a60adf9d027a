"""Deterministic discrete-event engine: virtual clock, ordered event queue, seeded PRNG.

Time is an integer count of microseconds since simulation start, so event
ordering never depends on floating-point rounding. Events that fire at the
same instant are processed in insertion order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

MASK64 = (1 << 64) - 1

MICROSECOND = 1
MILLISECOND = 1_000
SECOND = 1_000_000

_GOLDEN = 0x9E3779B97F4A7C15


class Rng:
    """splitmix64 generator (Steele, Lea & Flood 2014).

    The algorithm is fixed here on purpose: one seed yields the same draw
    sequence on every platform and Python version.
    """

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._state = self.seed

    def bits64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Next draw in [0, 1), from the top 53 bits."""
        return (self.bits64() >> 11) * 2.0 ** -53

    def derive(self, tag: int) -> "Rng":
        """Independent stream for a separate consumer; deterministic in (seed, tag)."""
        return Rng(Rng((self.seed ^ (tag * _GOLDEN)) & MASK64).bits64())


class EventHandle:
    """Returned by schedule(); cancel() prevents the event from ever firing."""

    __slots__ = ("fire_at", "seq_no", "cancelled")

    def __init__(self, fire_at: int, seq_no: int):
        self.fire_at = fire_at
        self.seq_no = seq_no
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


@dataclass
class RunSummary:
    events_processed: int
    final_time: int


class Simulator:
    """Single-threaded event loop with a monotone microsecond clock.

    The loss model is the only consumer of ``rng``; protocol logic stays
    deterministic no matter how many loss draws a run makes.
    """

    def __init__(self, seed: int = 1):
        self.now: int = 0
        self.rng = Rng(seed)
        self._queue: list[tuple[int, int, EventHandle, Callable[[], None]]] = []
        self._counter = 0

    def schedule(self, delay_us: int, action: Callable[[], None]) -> EventHandle:
        """Enqueue ``action`` to fire at now + delay_us."""
        if delay_us < 0:
            raise ValueError(f"negative delay: {delay_us}")
        handle = EventHandle(self.now + delay_us, self._counter)
        heapq.heappush(self._queue, (handle.fire_at, handle.seq_no, handle, action))
        self._counter += 1
        return handle

    def run_until(self, t_end: int) -> RunSummary:
        """Process every pending event with fire_at <= t_end, in (fire_at, seq_no) order.

        The clock ends at the time of the last event processed; it does not
        jump to t_end when the queue runs dry early.
        """
        processed = 0
        while self._queue and self._queue[0][0] <= t_end:
            fire_at, _, handle, action = heapq.heappop(self._queue)
            if handle.cancelled:
                continue
            self.now = fire_at
            action()
            processed += 1
        return RunSummary(processed, self.now)

    def pending(self) -> int:
        """Number of queued events, including not-yet-reaped cancelled ones."""
        return len(self._queue)
