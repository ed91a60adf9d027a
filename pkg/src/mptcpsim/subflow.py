"""One TCP-like flow within a multipath connection.

Covers the simplified connection state machine (CLOSED / LISTEN / SYN_SENT /
SYN_RCVD / ESTABLISHED / CLOSING), cumulative ACKs with SACK generation on
duplicates, fast retransmit after dupthresh duplicate ACKs, a retransmission
timer with exponential backoff, and the hooks into the congestion-control and
reordering-detector policies.

Sequence-number conventions: SYN and FIN consume one sequence number each, as
do the address-advertisement and end-of-data control options so that their
delivery is confirmed by ordinary cumulative ACKs and retried by the normal
RTO path.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from . import ccontrol
from .errors import InvariantError
from .reorder import DetectorKind, ReorderDetector, Verdict
from .trace import EventKind
from .wire import (
    AddAddr,
    DataFin,
    Dsn,
    Flags,
    Sack,
    Segment,
    Timestamp,
    seq_add,
    seq_le,
    seq_lt,
    seq_rel,
)


class SubflowConnState(Enum):
    CLOSED = "CLOSED"
    LISTEN = "LISTEN"
    SYN_SENT = "SYN_SENT"
    SYN_RCVD = "SYN_RCVD"
    ESTABLISHED = "ESTABLISHED"
    CLOSING = "CLOSING"


_S = SubflowConnState

# The only legal edges. Teardown by RST is connection destruction, not a
# state-machine transition, mirroring how a reset deletes the control block.
LEGAL_TRANSITIONS = frozenset(
    {
        (_S.CLOSED, _S.SYN_SENT),
        (_S.CLOSED, _S.LISTEN),
        (_S.SYN_SENT, _S.ESTABLISHED),
        (_S.LISTEN, _S.SYN_RCVD),
        (_S.SYN_RCVD, _S.ESTABLISHED),
        (_S.LISTEN, _S.CLOSING),
        (_S.SYN_SENT, _S.CLOSING),
        (_S.SYN_RCVD, _S.CLOSING),
        (_S.ESTABLISHED, _S.CLOSING),
        (_S.CLOSING, _S.CLOSED),
    }
)


def consumed_span(seg: Segment) -> int:
    """Sequence numbers consumed by a segment: SYN, payload, ADDR, DATA_FIN, FIN."""
    span = seg.payload_len
    if seg.has(Flags.SYN):
        span += 1
    if seg.option(AddAddr) is not None:
        span += 1
    if seg.option(DataFin) is not None:
        span += 1
    if seg.has(Flags.FIN):
        span += 1
    return span


@dataclass
class TxRecord:
    """One unacknowledged (or not yet sent) sequence-consuming segment."""

    seq: int
    length: int
    payload: bytes = b""
    mapping: object | None = None  # DsnMappingRecord for data chunks
    syn: bool = False
    with_ack: bool = True
    hs_option: object | None = None  # Mpc or Join carried on a SYN
    addr: object | None = None  # Address advertised by this segment
    final_data_seq: int | None = None  # DATA_FIN marker
    fin: bool = False
    first_tx: int | None = None
    last_tx: int = 0
    ts_val: int = 0
    retransmitted: bool = False
    sacked: bool = False

    def end(self) -> int:
        return seq_add(self.seq, self.length)


@dataclass
class OooRange:
    """Received bytes beyond rcv_nxt, kept disjoint; recency orders SACK blocks."""

    start: int
    end: int
    segment: Segment
    recency: int


class Subflow:
    """Sender and receiver halves of one subflow, driven by the event loop.

    The owning connection supplies configuration (mss, dupthresh, congestion
    algorithm), the transport (send_segment), the shared receive window, and
    the connection-level reassembler.
    """

    def __init__(self, conn, sf_id: int, local_addr, remote_addr, local_port: int, remote_port: int):
        self.conn = conn
        self.sf_id = sf_id
        self.local_addr = local_addr
        self.remote_addr = remote_addr
        self.local_port = local_port
        self.remote_port = remote_port

        self.state = _S.CLOSED
        self.mss: int = conn.mss
        self.dupthresh: int = conn.dupthresh

        # send side
        self.iss = 0
        self.snd_una = 0
        self.snd_nxt = 0
        self.next_enqueue_seq = 0
        self.cwnd = 1.0  # segments
        self.ssthresh = float(conn.rwnd) / conn.mss
        self.dup_ack_count = 0
        self.srtt: float | None = None
        self.rttvar: float = 0.0
        self.backoff = 1
        self._timer = None
        self._unsent: deque[TxRecord] = deque()
        self._inflight: deque[TxRecord] = deque()
        self.cc_byte_credit = 0
        self.fin_seq: int | None = None

        # receive side
        self.rcv_nxt = 0
        self.ooo: list[OooRange] = []
        self._recency = 0
        self.last_ts_received = 0

        self.detector: ReorderDetector | None = conn.make_detector()

        # per-run stats for the scenario summary
        self.bytes_sent = 0
        self.retransmissions = 0
        self.spurious_detections = 0

        self._out_log: list[Segment] = []

    # --- bookkeeping -----------------------------------------------------

    @property
    def now(self) -> int:
        return self.conn.sim.now

    def flight(self) -> int:
        return seq_rel(self.snd_nxt, self.snd_una)

    def queued_bytes(self) -> int:
        return seq_rel(self.next_enqueue_seq, self.snd_nxt)

    def cwnd_bytes(self) -> int:
        return int(round(self.cwnd * self.mss))

    def ssthresh_bytes(self) -> int:
        return int(round(self.ssthresh * self.mss))

    def can_accept_chunk(self) -> bool:
        """Room for one more MSS under floor(cwnd), counting queued-unsent bytes."""
        if self.state is not _S.ESTABLISHED:
            return False
        return self.flight() + self.queued_bytes() + self.mss <= int(self.cwnd) * self.mss

    def _trace(self, kind: EventKind, **kw) -> None:
        self.conn.tracer.emit(self.now, kind, conn_id=self.conn.conn_id, subflow_id=self.sf_id, **kw)

    def _trace_window(self) -> None:
        self._trace(
            EventKind.CWND, cwnd_bytes=self.cwnd_bytes(), ssthresh_bytes=self.ssthresh_bytes()
        )

    def _transition(self, new: SubflowConnState) -> None:
        edge = (self.state, new)
        if edge not in LEGAL_TRANSITIONS:
            raise InvariantError(
                f"illegal subflow transition {self.state.name} -> {new.name} (subflow {self.sf_id})"
            )
        self.state = new
        self._trace(EventKind.STATE, detail=new.name)
        self.conn.on_subflow_state(self)

    def _send(self, seg: Segment) -> None:
        self._out_log.append(seg)
        self.conn.send_segment(seg, self)

    # --- opening and closing ---------------------------------------------

    def open_active(self, hs_option) -> None:
        """Client side: send SYN carrying the capability or join option."""
        self._transition(_S.SYN_SENT)
        rec = TxRecord(seq=self.next_enqueue_seq, length=1, syn=True, with_ack=False, hs_option=hs_option)
        self.next_enqueue_seq = seq_add(rec.seq, 1)
        self._unsent.append(rec)
        self.try_send()

    def open_passive(self) -> None:
        self._transition(_S.LISTEN)

    def close(self) -> None:
        """Queue a FIN after any pending data; CLOSED once the FIN is acked."""
        if self.state in (_S.CLOSED, _S.CLOSING):
            return
        self._transition(_S.CLOSING)
        rec = TxRecord(seq=self.next_enqueue_seq, length=1, fin=True)
        self.next_enqueue_seq = seq_add(rec.seq, 1)
        self.fin_seq = rec.seq
        self._unsent.append(rec)
        self.try_send()

    def abort(self) -> None:
        """Tear down without a state-machine transition (control block destroyed)."""
        self._cancel_timer()
        if self.state is not _S.CLOSED:
            self.state = _S.CLOSED
            self._trace(EventKind.STATE, detail="CLOSED_aborted")
        self.conn.on_subflow_dead(self)

    # --- enqueue (sender) --------------------------------------------------

    def enqueue_data(self, mapping) -> TxRecord:
        rec = TxRecord(
            seq=self.next_enqueue_seq,
            length=len(mapping.payload),
            payload=mapping.payload,
            mapping=mapping,
        )
        mapping.subflow_id = self.sf_id
        mapping.subflow_seq = rec.seq
        self.next_enqueue_seq = seq_add(rec.seq, rec.length)
        self._unsent.append(rec)
        return rec

    def enqueue_addr(self, address) -> TxRecord:
        rec = TxRecord(seq=self.next_enqueue_seq, length=1, addr=address)
        self.next_enqueue_seq = seq_add(rec.seq, 1)
        self._unsent.append(rec)
        return rec

    def enqueue_data_fin(self, final_data_seq: int) -> TxRecord:
        rec = TxRecord(seq=self.next_enqueue_seq, length=1, final_data_seq=final_data_seq)
        self.next_enqueue_seq = seq_add(rec.seq, 1)
        self._unsent.append(rec)
        return rec

    # --- transmit ----------------------------------------------------------

    def try_send(self) -> list[Segment]:
        """Emit queued segments while floor(cwnd) and the shared window permit."""
        if self.state in (_S.CLOSED, _S.LISTEN):
            return []
        sent: list[Segment] = []
        while self._unsent:
            rec = self._unsent[0]
            if self.flight() + rec.length > int(self.cwnd) * self.mss:
                break
            if rec.mapping is not None and not self.conn.rwnd_allows(rec.mapping):
                break
            self._unsent.popleft()
            self._inflight.append(rec)
            rec.first_tx = rec.last_tx = self.now
            rec.ts_val = self.now
            self.snd_nxt = rec.end()
            seg = self._build_segment(rec)
            self.bytes_sent += len(rec.payload)
            self._trace(EventKind.SEND, seq=rec.seq, ack=seg.ack, detail=_describe(rec))
            self._send(seg)
            sent.append(seg)
        if self.flight() > 0 and self._timer is None:
            self._restart_timer()
        return sent

    def _build_segment(self, rec: TxRecord) -> Segment:
        options = []
        flags = Flags(0)
        if rec.syn:
            flags |= Flags.SYN
            if rec.with_ack:
                flags |= Flags.ACK
            if rec.hs_option is not None:
                options.append(rec.hs_option)
        else:
            flags |= Flags.ACK
        if rec.fin:
            flags |= Flags.FIN
        if rec.mapping is not None:
            options.append(Dsn(rec.mapping.data_seq, rec.seq, len(rec.payload)))
        if rec.addr is not None:
            options.append(AddAddr(rec.addr))
        if rec.final_data_seq is not None:
            options.append(DataFin(rec.final_data_seq))
        options.append(Timestamp(ts_val=rec.ts_val, ts_echo=self.last_ts_received))
        return Segment(
            src_addr=self.local_addr,
            dst_addr=self.remote_addr,
            src_port=self.local_port,
            dst_port=self.remote_port,
            seq=rec.seq,
            ack=self.rcv_nxt if flags & Flags.ACK else 0,
            flags=flags,
            options=tuple(options),
            payload=rec.payload,
        )

    def _send_rst(self, cause: Segment) -> None:
        rst = Segment(
            src_addr=self.local_addr,
            dst_addr=self.remote_addr,
            src_port=self.local_port,
            dst_port=self.remote_port,
            seq=cause.ack,
            ack=0,
            flags=Flags.RST,
        )
        self._trace(EventKind.SEND, seq=rst.seq, detail="RST")
        self._send(rst)

    def _send_ack(self, trigger: Segment, dup_block: tuple[int, int] | None = None) -> None:
        """Acknowledge a data arrival; duplicates carry a SACK led by the trigger range."""
        ts = trigger.option(Timestamp)
        echo = ts.ts_val if ts is not None else self.last_ts_received
        options: list = [Timestamp(ts_val=self.now, ts_echo=echo)]
        detail = ""
        if dup_block is not None:
            blocks = self._sack_blocks(dup_block)
            if blocks:
                options.append(Sack(tuple(blocks)))
                detail = "sack=" + ";".join(f"{l}-{r}" for l, r in blocks)
        seg = Segment(
            src_addr=self.local_addr,
            dst_addr=self.remote_addr,
            src_port=self.local_port,
            dst_port=self.remote_port,
            seq=self.snd_nxt,
            ack=self.rcv_nxt,
            flags=Flags.ACK,
            options=tuple(options),
        )
        kind = EventKind.DUPACK if dup_block is not None else EventKind.ACK
        self._trace(kind, ack=self.rcv_nxt, detail=detail)
        self._send(seg)

    def _sack_blocks(self, first: tuple[int, int]) -> list[tuple[int, int]]:
        """First block is the triggering range; then stored ranges, newest first."""
        blocks: list[tuple[int, int]] = []
        if first[0] < first[1]:  # wire blocks are plain-ordered; skip wrap-spanning ranges
            blocks.append(first)
        for item in sorted(self.ooo, key=lambda o: -o.recency):
            if len(blocks) >= 4:
                break
            block = (item.start, item.end)
            if block in blocks or not block[0] < block[1]:
                continue
            blocks.append(block)
        return blocks

    # --- timers ------------------------------------------------------------

    def rto_us(self) -> int:
        if self.srtt is None:
            base = 1_000_000
        else:
            # 10 ms floor on the variance term keeps the timer off a jitter-free RTT
            base = max(200_000, int(self.srtt + max(4.0 * self.rttvar, 10_000.0)))
        return min(base * self.backoff, 60_000_000)

    def _restart_timer(self) -> None:
        self._cancel_timer()
        self._timer = self.conn.sim.schedule(self.rto_us(), self.on_rto)

    def _cancel_timer(self) -> None:
        if self._timer is not None:
            self._timer.cancel()
            self._timer = None

    def on_rto(self) -> None:
        """Retransmission timeout: resend the oldest segment, collapse the window."""
        self._timer = None
        rec = self._oldest_outstanding()
        if rec is None:
            return
        self._trace(EventKind.RTO, seq=rec.seq, detail=f"rto_us={self.rto_us()}")
        self._arm_detector(rec)
        self._retransmit(rec)
        flight_segments = self.flight() / self.mss
        self.ssthresh = max(flight_segments / 2.0, 2.0)
        self.cwnd = 1.0
        self._abort_dsack_phase()
        self._trace_window()
        self._trace(EventKind.SSTHRESH, ssthresh_bytes=self.ssthresh_bytes())
        self.backoff = min(self.backoff * 2, 64)
        self._restart_timer()

    def _oldest_outstanding(self) -> TxRecord | None:
        if self._inflight:
            return self._inflight[0]
        return None

    def _arm_detector(self, rec: TxRecord) -> None:
        # Pre-reduction snapshot; the retransmitted copy will carry ts_val=now.
        if self.detector is not None:
            self.detector.on_retransmit(
                self.cwnd, self.ssthresh, rec.seq, self.now, self.now, self.snd_una
            )

    def _retransmit(self, rec: TxRecord) -> None:
        rec.retransmitted = True
        rec.last_tx = self.now
        rec.ts_val = self.now
        self.retransmissions += 1
        seg = self._build_segment(rec)
        self._trace(EventKind.RETX, seq=rec.seq, ack=seg.ack, detail=_describe(rec))
        self._send(seg)

    def _abort_dsack_phase(self) -> None:
        if self.detector is not None and self.detector.abort_dsack_slow_start():
            self._trace(EventKind.DSACK_SS_END, cwnd_bytes=self.cwnd_bytes(), detail="aborted_by_loss")

    # --- arrival dispatch ----------------------------------------------------

    def on_segment_arrival(self, seg: Segment) -> tuple[list[Segment], list[tuple[int, bytes]]]:
        """Handle one arriving segment; returns (segments emitted, delivered data ranges)."""
        self._out_log = []
        delivered: list[tuple[int, bytes]] = []
        ts = seg.option(Timestamp)

        if self.state is _S.CLOSED:
            if not seg.has(Flags.RST):
                self._send_rst(seg)
            return self._out_log, delivered

        if seg.has(Flags.RST):
            self.abort()
            return self._out_log, delivered

        if self.state is _S.LISTEN:
            if seg.has(Flags.SYN) and not seg.has(Flags.ACK):
                self._passive_syn(seg)
            else:
                self._send_rst(seg)
            return self._out_log, delivered

        if self.state is _S.SYN_SENT:
            if seg.has(Flags.SYN) and seg.has(Flags.ACK) and seg.ack == seq_add(self.iss, 1):
                if ts is not None:
                    self.last_ts_received = ts.ts_val
                self._on_ack(seg)
                self.rcv_nxt = seq_add(seg.seq, 1)
                self._transition(_S.ESTABLISHED)
                self._send_ack(trigger=seg)
                self.conn.on_subflow_established(self, seg)
                self.conn.pump()
            return self._out_log, delivered

        if self.state is _S.SYN_RCVD:
            if seg.has(Flags.SYN) and seq_add(seg.seq, 1) == self.rcv_nxt:
                # our SYN-ACK was lost; resend it
                rec = self._oldest_outstanding()
                if rec is not None and rec.syn:
                    self._retransmit(rec)
                return self._out_log, delivered
            if seg.has(Flags.ACK) and seq_le(seq_add(self.iss, 1), seg.ack):
                self._transition(_S.ESTABLISHED)
                self.conn.on_subflow_established(self, seg)
                self._on_ack(seg)
                if consumed_span(seg) > 0:
                    delivered = self._on_data(seg)
                self.conn.pump()
            return self._out_log, delivered

        # ESTABLISHED or CLOSING
        if ts is not None:
            self.last_ts_received = ts.ts_val
        if seg.has(Flags.ACK):
            self._on_ack(seg)
        if consumed_span(seg) > 0:
            delivered = self._on_data(seg)
        return self._out_log, delivered

    def _passive_syn(self, seg: Segment) -> None:
        ts = seg.option(Timestamp)
        if ts is not None:
            self.last_ts_received = ts.ts_val
        self.rcv_nxt = seq_add(seg.seq, 1)
        self._transition(_S.SYN_RCVD)
        rec = TxRecord(
            seq=self.next_enqueue_seq, length=1, syn=True, with_ack=True,
            hs_option=self.conn.synack_option(self),
        )
        self.next_enqueue_seq = seq_add(rec.seq, 1)
        self._unsent.append(rec)
        self.try_send()

    # --- sender: ACK processing ---------------------------------------------

    def _on_ack(self, seg: Segment) -> None:
        ack = seg.ack
        if seq_lt(self.snd_nxt, ack):
            self._trace(EventKind.RECV, ack=ack, detail="invalid_ack_above_snd_nxt")
            return
        if seq_lt(self.snd_una, ack):
            self._handle_new_ack(seg, ack)
        elif (
            ack == self.snd_una
            and self.flight() > 0
            and consumed_span(seg) == 0
        ):
            self.dup_ack_count += 1
            sack = seg.option(Sack)
            if sack is not None:
                self._update_scoreboard(sack)
                self._check_dsack(seg)
            if self.dup_ack_count == self.dupthresh:
                self._fast_retransmit()

    def _handle_new_ack(self, seg: Segment, ack: int) -> None:
        popped = self._pop_acked(ack)
        data_bytes = sum(len(r.payload) for r in popped)
        sample_rec = None
        for rec in popped:
            if not rec.retransmitted:
                sample_rec = rec
        if sample_rec is not None:
            self._rtt_sample(self.now - sample_rec.last_tx)
            # Karn: the backed-off timer persists until a fresh sample is taken
            self.backoff = 1
        self.snd_una = ack
        self.dup_ack_count = 0

        restored = self._check_eifel(seg, ack)
        sack = seg.option(Sack)
        if sack is not None:
            self._check_dsack(seg)

        det = self.detector
        if det is not None and det.dsack_ss.active:
            new_cwnd, ended = det.growth_on_ack(self.cwnd)
            if new_cwnd != self.cwnd:
                self.cwnd = new_cwnd
                self._trace_window()
            if ended:
                self._trace(EventKind.DSACK_SS_END, cwnd_bytes=self.cwnd_bytes())
        elif not restored and data_bytes > 0:
            self._grow_window(data_bytes)

        for rec in popped:
            if rec.fin and self.state is _S.CLOSING:
                self._transition(_S.CLOSED)
        self.conn.on_data_acked(self, popped)

        if self.flight() > 0:
            self._restart_timer()
        else:
            self._cancel_timer()
        self.conn.pump()

    def _pop_acked(self, ack: int) -> list[TxRecord]:
        popped = []
        while self._inflight:
            rec = self._inflight[0]
            if not seq_le(rec.end(), ack):
                break
            popped.append(self._inflight.popleft())
        return popped

    def _rtt_sample(self, sample_us: int) -> None:
        if self.srtt is None:
            self.srtt = float(sample_us)
            self.rttvar = sample_us / 2.0
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample_us)
            self.srtt = 0.875 * self.srtt + 0.125 * sample_us

    def _check_eifel(self, seg: Segment, ack: int) -> bool:
        det = self.detector
        if det is None or det.kind is not DetectorKind.EIFEL or not det.armed:
            return False
        covers = seq_lt(det.snapshot.retrans_seq, ack)
        ts = seg.option(Timestamp)
        echoed = ts.ts_echo if ts is not None else 0
        verdict, snap = det.eifel_on_ack(covers, echoed)
        if verdict is Verdict.SPURIOUS:
            self.cwnd = snap.saved_cwnd
            self.ssthresh = snap.saved_ssthresh
            self.spurious_detections += 1
            self._trace(
                EventKind.SPURIOUS_EIFEL,
                seq=snap.retrans_seq,
                detail=(
                    f"restored_cwnd_bytes={self.cwnd_bytes()} "
                    f"restored_ssthresh_bytes={self.ssthresh_bytes()}"
                ),
            )
            self._trace_window()
            return True
        return False

    def _check_dsack(self, seg: Segment) -> None:
        det = self.detector
        if det is None or det.kind is not DetectorKind.DSACK or not det.armed:
            return
        sack = seg.option(Sack)
        if sack is None:
            return
        if any(left >= right for left, right in sack.blocks):
            self._trace(EventKind.RECV, detail="malformed_sack_ignored")
            return
        verdict, snap = det.dsack_on_ack(seg.ack, sack.blocks)
        if verdict is Verdict.SPURIOUS:
            self.spurious_detections += 1
            target_bytes = int(round(snap.saved_cwnd * self.mss))
            self._trace(
                EventKind.SPURIOUS_DSACK, seq=snap.retrans_seq, detail=f"target_cwnd_bytes={target_bytes}"
            )
            if self.cwnd < snap.saved_cwnd:
                self._trace(
                    EventKind.DSACK_SS_BEGIN,
                    cwnd_bytes=self.cwnd_bytes(),
                    detail=f"target_cwnd_bytes={target_bytes}",
                )
            else:
                # nothing to regrow; keep the invariant cwnd < target for active phases
                det.dsack_ss.active = False

    def _update_scoreboard(self, sack: Sack) -> None:
        for left, right in sack.blocks:
            for rec in self._inflight:
                if seq_le(left, rec.seq) and seq_le(rec.end(), right):
                    rec.sacked = True

    def _grow_window(self, data_bytes: int) -> None:
        before = self.cwnd
        if self.conn.cc_ack_granularity == "per_ack":
            steps = 1
        else:
            self.cc_byte_credit += data_bytes
            steps = self.cc_byte_credit // self.mss
            self.cc_byte_credit -= steps * self.mss
        for _ in range(steps):
            if self.cwnd < self.ssthresh:
                self.cwnd += 1.0
            else:
                view = self.conn.window_view()
                if self.sf_id in view.windows:
                    self.cwnd = ccontrol.on_ack(self.conn.cc, view, self.sf_id)
                else:
                    self.cwnd += ccontrol.ack_increment(self.conn.cc, self.cwnd, self.cwnd)
        if self.cwnd != before:
            self._trace_window()

    def _fast_retransmit(self) -> None:
        rec = self._oldest_outstanding()
        if rec is None:
            return
        self._arm_detector(rec)
        self._retransmit(rec)
        flight_segments = self.flight() / self.mss
        self.ssthresh = max(flight_segments / 2.0, 2.0)
        view = self.conn.window_view()
        if self.sf_id in view.windows:
            self.cwnd = ccontrol.on_loss(self.conn.cc, view, self.sf_id)
        else:
            self.cwnd = ccontrol.loss_window(self.conn.cc, self.cwnd, self.cwnd)
        self._abort_dsack_phase()
        self._trace_window()
        self._trace(EventKind.SSTHRESH, ssthresh_bytes=self.ssthresh_bytes())
        self._restart_timer()

    # --- receiver: data processing --------------------------------------------

    def _on_data(self, seg: Segment) -> list[tuple[int, bytes]]:
        span = consumed_span(seg)
        start = seg.seq
        end = seq_add(start, span)
        self._trace(EventKind.RECV, seq=start, detail=_describe_seg(seg))
        delivered: list[tuple[int, bytes]] = []
        start_rel = seq_rel(start, self.rcv_nxt)
        end_rel = seq_rel(end, self.rcv_nxt)
        if end_rel <= 0:
            # everything already received: duplicate, report it as the first SACK block
            self._send_ack(trigger=seg, dup_block=(start, end))
        elif start_rel <= 0:
            delivered.extend(self._consume(seg, self.rcv_nxt, end))
            self.rcv_nxt = end
            delivered.extend(self._drain_ooo())
            self._send_ack(trigger=seg)
        else:
            self._store_ooo(seg, start, end)
            self._send_ack(trigger=seg, dup_block=(start, end))
        for data_seq, chunk in delivered:
            self.conn.reassemble(data_seq, chunk)
        return delivered

    def _consume(self, seg: Segment, from_seq: int, until_seq: int) -> list[tuple[int, bytes]]:
        """Consume seg's bytes in [from_seq, until_seq); fire control effects once."""
        out: list[tuple[int, bytes]] = []
        pos = seg.seq
        if seg.has(Flags.SYN):
            pos = seq_add(pos, 1)
        payload_start = pos
        payload_end = seq_add(payload_start, seg.payload_len)
        if seg.payload_len:
            lo = max(seq_rel(from_seq, payload_start), 0)
            hi = min(seq_rel(until_seq, payload_start), seg.payload_len)
            if lo < hi:
                chunk = seg.payload[lo:hi]
                dsn = seg.option(Dsn)
                if dsn is not None:
                    offset = seq_rel(seq_add(payload_start, lo), dsn.subflow_seq)
                    out.append((dsn.data_seq + offset, chunk))
        pos = payload_end
        addr_opt = seg.option(AddAddr)
        if addr_opt is not None:
            if seq_rel(pos, from_seq) >= 0 and seq_rel(pos, until_seq) < 0:
                self.conn.on_addr_advertised(addr_opt.address)
            pos = seq_add(pos, 1)
        data_fin = seg.option(DataFin)
        if data_fin is not None:
            if seq_rel(pos, from_seq) >= 0 and seq_rel(pos, until_seq) < 0:
                self.conn.on_data_fin(data_fin.final_data_seq)
            pos = seq_add(pos, 1)
        return out

    def _drain_ooo(self) -> list[tuple[int, bytes]]:
        out: list[tuple[int, bytes]] = []
        while self.ooo and seq_rel(self.ooo[0].start, self.rcv_nxt) <= 0:
            item = self.ooo.pop(0)
            if seq_rel(item.end, self.rcv_nxt) <= 0:
                continue  # fully stale
            from_seq = item.start if seq_rel(item.start, self.rcv_nxt) >= 0 else self.rcv_nxt
            out.extend(self._consume(item.segment, from_seq, item.end))
            self.rcv_nxt = item.end
        return out

    def _store_ooo(self, seg: Segment, start: int, end: int) -> None:
        pieces = [(seq_rel(start, self.rcv_nxt), seq_rel(end, self.rcv_nxt))]
        for item in self.ooo:
            lo = seq_rel(item.start, self.rcv_nxt)
            hi = seq_rel(item.end, self.rcv_nxt)
            remaining = []
            for s, e in pieces:
                if e <= lo or s >= hi:
                    remaining.append((s, e))
                    continue
                if s < lo:
                    remaining.append((s, lo))
                if e > hi:
                    remaining.append((hi, e))
            pieces = remaining
        self._recency += 1
        for s, e in pieces:
            if s >= e:
                continue
            item = OooRange(seq_add(self.rcv_nxt, s), seq_add(self.rcv_nxt, e), seg, self._recency)
            self.ooo.append(item)
        self.ooo.sort(key=lambda o: seq_rel(o.start, self.rcv_nxt))


def _describe(rec: TxRecord) -> str:
    parts = []
    if rec.syn:
        parts.append("SYN+ACK" if rec.with_ack else "SYN")
        if rec.hs_option is not None:
            parts.append(type(rec.hs_option).__name__.upper())
    if rec.payload:
        parts.append(f"len={len(rec.payload)}")
    if rec.addr is not None:
        parts.append(f"addr={rec.addr.quad}")
    if rec.final_data_seq is not None:
        parts.append(f"data_fin={rec.final_data_seq}")
    if rec.fin:
        parts.append("FIN")
    return " ".join(parts)


def _describe_seg(seg: Segment) -> str:
    parts = []
    for flag in (Flags.SYN, Flags.FIN, Flags.RST):
        if seg.has(flag):
            parts.append(flag.name)
    if seg.payload_len:
        parts.append(f"len={seg.payload_len}")
    if seg.option(AddAddr) is not None:
        parts.append("ADDR")
    if seg.option(DataFin) is not None:
        parts.append("DATA_FIN")
    return " ".join(parts)
