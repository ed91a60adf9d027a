"""Hosts, addresses, and point-to-point links.

A link carries raw packets (byte strings) in both directions with a
serialization time derived from its bandwidth, a piecewise-constant one-way
propagation delay, and i.i.d. Bernoulli loss. Each direction is FIFO: a delay
decrease never reorders deliveries in flight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .simcore import Rng, Simulator


@dataclass(frozen=True)
class Address:
    """One host interface, rendered as a dotted quad for configs and traces."""

    host: int
    iface: int

    def __post_init__(self):
        if not (0 <= self.host <= 255 and 0 <= self.iface <= 255):
            raise ValueError(f"address out of range: host={self.host} iface={self.iface}")

    @property
    def quad(self) -> str:
        return f"10.{self.host}.{self.iface}.1"

    def pack(self) -> int:
        return (10 << 24) | (self.host << 16) | (self.iface << 8) | 1

    @classmethod
    def unpack(cls, value: int) -> "Address":
        if value >> 24 != 10 or value & 0xFF != 1:
            raise ValueError(f"not an address word: {value:#x}")
        return cls((value >> 16) & 0xFF, (value >> 8) & 0xFF)


class Link:
    """Point-to-point pipe between two addresses; both directions share parameters.

    delay_schedule is a list of (from_time_us, one_way_delay_us) entries,
    first entry at time 0, times strictly increasing.
    """

    def __init__(
        self,
        a: Address,
        b: Address,
        bandwidth_bps: int,
        delay_schedule: list[tuple[int, int]],
        loss_rate: float,
    ):
        if bandwidth_bps <= 0:
            raise ValueError(f"bandwidth must be positive: {bandwidth_bps}")
        if not delay_schedule or delay_schedule[0][0] != 0:
            raise ValueError("delay schedule must start at t=0")
        times = [t for t, _ in delay_schedule]
        if times != sorted(times) or len(set(times)) != len(times):
            raise ValueError("delay schedule times must be strictly increasing")
        if any(d < 0 for _, d in delay_schedule):
            raise ValueError("delays must be non-negative")
        if not 0.0 <= loss_rate <= 1.0:
            raise ValueError(f"loss rate must be in [0, 1]: {loss_rate}")
        self.a = a
        self.b = b
        self.bandwidth_bps = bandwidth_bps
        self.delay_schedule = list(delay_schedule)
        self.loss_rate = loss_rate
        # per sending endpoint
        self._busy_until: dict[Address, int] = {a: 0, b: 0}
        self._last_delivery: dict[Address, int] = {a: 0, b: 0}
        self.sent = 0
        self.delivered = 0
        self.dropped = 0

    def endpoints(self) -> tuple[Address, Address]:
        return (self.a, self.b)

    def delay_at(self, t: int) -> int:
        """One-way delay in effect at time t (latest schedule entry with from_time <= t)."""
        delay = self.delay_schedule[0][1]
        for from_time, value in self.delay_schedule:
            if from_time <= t:
                delay = value
            else:
                break
        return delay

    def serialization_us(self, nbytes: int) -> int:
        return (nbytes * 8 * 1_000_000) // self.bandwidth_bps

    def transmit(
        self,
        sim: Simulator,
        rng: Rng,
        src: Address,
        nbytes: int,
        deliver: Callable[[], None],
    ) -> int | None:
        """Send nbytes from endpoint src; returns the delivery time, or None if dropped.

        Delivery happens at max(now, busy_until) + serialization + current
        one-way delay, clamped so deliveries in one direction stay FIFO.
        """
        if nbytes <= 0:
            raise ValueError(f"packet must have positive size: {nbytes}")
        if src not in self._busy_until:
            raise ValueError(f"{src.quad} is not an endpoint of this link")
        self.sent += 1
        if rng.uniform() < self.loss_rate:
            self.dropped += 1
            return None
        start = max(sim.now, self._busy_until[src])
        self._busy_until[src] = start + self.serialization_us(nbytes)
        at = self._busy_until[src] + self.delay_at(sim.now)
        at = max(at, self._last_delivery[src])
        self._last_delivery[src] = at

        def fire():
            self.delivered += 1
            deliver()

        sim.schedule(at - sim.now, fire)
        return at


class Host:
    """A network endpoint owning one address per attached link."""

    def __init__(self, host_id: int, n_ifaces: int):
        self.host_id = host_id
        self.addresses = [Address(host_id, i) for i in range(n_ifaces)]
        self.segment_handler: Callable | None = None

    def receive(self, segment) -> None:
        if self.segment_handler is not None:
            self.segment_handler(segment)
