"""Spurious-retransmission detection policies.

Both detectors save (cwnd, ssthresh) before a retransmission reduces them.
The timestamp detector compares the retransmission's timestamp against the
echo carried by the first ACK that covers the retransmitted byte: an older
echo means the original segment got through and the saved state is restored
wholesale. The duplicate-SACK detector waits for the retransmitted range to
be acknowledged a second time (first SACK block entirely below the cumulative
ACK) and then regrows the window to the saved value, one segment per ACK.

At most one snapshot is armed per subflow, covering the oldest outstanding
retransmission; a new retransmission replaces the snapshot only once the
previous one's sequence has been cumulatively acknowledged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .wire import seq_le, seq_lt


class DetectorKind(Enum):
    NONE = "none"
    EIFEL = "eifel"
    DSACK = "dsack"


class Verdict(Enum):
    SPURIOUS = "spurious"
    GENUINE = "genuine"
    INCONCLUSIVE = "inconclusive"


@dataclass
class Snapshot:
    saved_cwnd: float
    saved_ssthresh: float
    retrans_seq: int
    retrans_ts_val: int
    taken_at: int
    armed: bool = True


@dataclass
class DsackSlowStartState:
    active: bool = False
    target_cwnd: float = 0.0


def dsack_growth_on_ack(state: DsackSlowStartState, cwnd: float) -> float:
    """One ACK's worth of slow-start regrowth toward the saved window.

    Grows by one segment per ACK; reaching the target clamps the window to
    exactly the target and ends the phase.
    """
    if not state.active:
        return cwnd
    grown = cwnd + 1.0
    if grown >= state.target_cwnd:
        state.active = False
        return state.target_cwnd
    return grown


class ReorderDetector:
    """Per-sender-subflow policy object; kind NONE is a transparent no-op."""

    def __init__(self, kind: DetectorKind):
        self.kind = kind
        self.snapshot: Snapshot | None = None
        self.dsack_ss = DsackSlowStartState()

    @property
    def armed(self) -> bool:
        return self.snapshot is not None and self.snapshot.armed

    def on_retransmit(
        self, cwnd: float, ssthresh: float, seq: int, ts_val: int, now: int, snd_una: int
    ) -> Snapshot | None:
        """Arm a snapshot before the window reduction for a retransmission of seq.

        Call with the pre-reduction cwnd/ssthresh. While an armed snapshot's
        sequence is still outstanding it is kept unchanged; once that sequence
        has been acked (stale snapshot), a new retransmission replaces it.
        """
        if self.kind is DetectorKind.NONE:
            return None
        if self.armed and not seq_lt(self.snapshot.retrans_seq, snd_una):
            return self.snapshot
        self.snapshot = Snapshot(cwnd, ssthresh, seq, ts_val, now)
        return self.snapshot

    def eifel_on_ack(self, ack_covers_retrans: bool, echoed_ts: int) -> tuple[Verdict, Snapshot | None]:
        """Judge an ACK that may acknowledge the retransmitted sequence.

        Returns (verdict, snapshot-to-restore). The snapshot is returned only
        on SPURIOUS; the caller applies the restoration.
        """
        if self.kind is not DetectorKind.EIFEL or not self.armed or not ack_covers_retrans:
            return Verdict.INCONCLUSIVE, None
        snap = self.snapshot
        snap.armed = False
        if echoed_ts < snap.retrans_ts_val:
            # Echo predates the retransmission: the original segment arrived.
            return Verdict.SPURIOUS, snap
        return Verdict.GENUINE, None

    def dsack_on_ack(self, cum_ack: int, blocks: tuple[tuple[int, int], ...]) -> tuple[Verdict, Snapshot | None]:
        """Judge a SACK-bearing ACK; a duplicate-SACK for the armed sequence is spurious.

        A block is a DSACK when it lies entirely below the cumulative ACK.
        Malformed blocks (left >= right) yield INCONCLUSIVE; the caller logs.
        """
        if self.kind is not DetectorKind.DSACK or not self.armed or not blocks:
            return Verdict.INCONCLUSIVE, None
        left, right = blocks[0]
        if left >= right:
            return Verdict.INCONCLUSIVE, None
        snap = self.snapshot
        is_dsack = seq_le(right, cum_ack)
        covers = seq_le(left, snap.retrans_seq) and seq_lt(snap.retrans_seq, right)
        if is_dsack and covers:
            snap.armed = False
            self.dsack_ss = DsackSlowStartState(active=True, target_cwnd=snap.saved_cwnd)
            return Verdict.SPURIOUS, snap
        return Verdict.GENUINE, None

    def growth_on_ack(self, cwnd: float) -> tuple[float, bool]:
        """Apply one ACK of DSACK slow start; returns (new cwnd, phase_ended)."""
        if not self.dsack_ss.active:
            return cwnd, False
        new = dsack_growth_on_ack(self.dsack_ss, cwnd)
        return new, not self.dsack_ss.active

    def abort_dsack_slow_start(self) -> bool:
        """End the regrowth phase early (a genuine loss event supersedes it)."""
        if self.dsack_ss.active:
            self.dsack_ss.active = False
            return True
        return False
