"""Coupled congestion-window update policies.

Windows are real numbers of segments. ``w_r`` is one subflow's window and
``w`` the sum over the connection's live subflows, recomputed at every update
so joins and closes are reflected immediately.

Per-ACK increase rules (congestion avoidance only; slow start is handled by
the subflow):

    uncoupled        w_r += 1 / w_r
    fully_coupled    w_r += 1 / w
    linked_increases w_r += a / w
    rtt_compensator  w_r += min(a / w, 1 / w)

Per-loss decrease rules, all floored at one segment:

    uncoupled        w_r = max(w_r / 2, 1)
    fully_coupled    w_r = max(w_r - w / 2, 1)
    linked_increases w_r = max(w_r / 2, 1)
    rtt_compensator  w_r = max(w_r / 2, 1)

The rtt_compensator second term is ``1/w`` by default; ``per_path`` switches
it to ``1/w_r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class CcKind(Enum):
    UNCOUPLED = "uncoupled"
    FULLY_COUPLED = "fully_coupled"
    LINKED_INCREASES = "linked_increases"
    RTT_COMPENSATOR = "rtt_compensator"


@dataclass(frozen=True)
class CcAlgorithm:
    kind: CcKind
    a: float = 1.0
    rttc_second_term: str = "total"  # "total" -> 1/w, "per_path" -> 1/w_r

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"aggressiveness a must be positive: {self.a}")
        if self.rttc_second_term not in ("total", "per_path"):
            raise ValueError(f"unknown rttc_second_term: {self.rttc_second_term}")

    @classmethod
    def from_name(cls, name: str, a: float = 1.0, rttc_second_term: str = "total") -> "CcAlgorithm":
        return cls(CcKind(name), a=a, rttc_second_term=rttc_second_term)


@dataclass
class ConnectionWindowView:
    """Per-subflow windows at one instant; total is always recomputed."""

    windows: dict[int, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(self.windows.values())


def ack_increment(alg: CcAlgorithm, w_r: float, w: float) -> float:
    """Window increase for one ACK on a subflow with window w_r (total w)."""
    if alg.kind is CcKind.UNCOUPLED:
        return 1.0 / w_r
    if alg.kind is CcKind.FULLY_COUPLED:
        return 1.0 / w
    if alg.kind is CcKind.LINKED_INCREASES:
        return alg.a / w
    second = (1.0 / w_r) if alg.rttc_second_term == "per_path" else (1.0 / w)
    return min(alg.a / w, second)


def loss_window(alg: CcAlgorithm, w_r: float, w: float) -> float:
    """Window after one loss event on a subflow with window w_r (total w)."""
    if alg.kind is CcKind.FULLY_COUPLED:
        return max(w_r - w / 2.0, 1.0)
    return max(w_r / 2.0, 1.0)


def on_ack(alg: CcAlgorithm, view: ConnectionWindowView, r: int) -> float:
    """New w_r after an ACK on subflow r."""
    return view.windows[r] + ack_increment(alg, view.windows[r], view.total)


def on_loss(alg: CcAlgorithm, view: ConnectionWindowView, r: int) -> float:
    """New w_r after a loss event on subflow r."""
    return loss_window(alg, view.windows[r], view.total)
