"""Upper transport sublayer: one logical connection over several subflows.

Responsibilities: capability handshake on the first subflow, address
advertisement right after establishment, JOIN handshakes for additional
address pairs (one subflow per address), MSS-sized chunking with data-sequence
mappings, round-robin scheduling over subflows with congestion-window space,
connection-level reassembly behind a single shared receive window, and the
end-of-data close handshake.

Subflow-level cumulative ACKs of mapped bytes double as the data-level
acknowledgment; retransmissions stay on the subflow that first carried the
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .ccontrol import CcAlgorithm, ConnectionWindowView
from .errors import InvariantError
from .netmodel import Address, Host
from .reorder import DetectorKind, ReorderDetector
from .simcore import Simulator
from .subflow import Subflow, SubflowConnState, TxRecord
from .trace import EventKind, Tracer
from .wire import Flags, Join, Mpc, Segment

CLIENT_PORT_BASE = 49152
SERVER_PORT = 5001


class ConnPhase(Enum):
    IDLE = "IDLE"
    HANDSHAKING = "HANDSHAKING"
    ESTABLISHED = "ESTABLISHED"
    DATA_FIN_SENT = "DATA_FIN_SENT"
    CLOSED = "CLOSED"


@dataclass
class DsnMappingRecord:
    """Ties one connection-level byte range to its carrying subflow bytes."""

    data_seq: int
    length: int
    payload: bytes
    subflow_id: int | None = None
    subflow_seq: int | None = None
    acked_at_data_level: bool = False


class MptcpConnection:
    """One endpoint of a multipath connection; owns its subflows."""

    def __init__(
        self,
        conn_id: int,
        sim: Simulator,
        tracer: Tracer,
        host: Host,
        network_send,
        *,
        role: str,
        mss: int = 1400,
        rwnd: int = 65536,
        dupthresh: int = 3,
        cc: CcAlgorithm | None = None,
        detector_kind: DetectorKind | None = DetectorKind.NONE,
        cc_ack_granularity: str = "per_mss",
        token_rng=None,
        on_deliver=None,
        on_eos=None,
        on_closed=None,
    ):
        self.conn_id = conn_id
        self.sim = sim
        self.tracer = tracer
        self.host = host
        self._network_send = network_send
        self.role = role
        self.mss = mss
        self.rwnd = rwnd
        self.dupthresh = dupthresh
        self.cc = cc if cc is not None else CcAlgorithm.from_name("linked_increases")
        self.detector_kind = detector_kind
        self.cc_ack_granularity = cc_ack_granularity
        self._token_rng = token_rng
        self.on_deliver = on_deliver
        self.on_eos = on_eos
        self.on_closed = on_closed

        self.phase = ConnPhase.IDLE
        self.token: int | None = None
        self.local_addrs: list[Address] = list(host.addresses)
        self.known_remote_addrs: list[Address] = []
        self.subflows: list[Subflow] = []
        self._by_pair: dict[tuple[Address, Address], Subflow] = {}
        self.single_path_fallback = False
        self._advertised = False
        self.rr_index = 0

        # send side (connection level)
        self._sendbuf = bytearray()
        self._sched_off = 0
        self.next_data_seq = 0
        self.data_una = 0
        self._mappings: dict[int, DsnMappingRecord] = {}
        self.closing_requested = False
        self._data_fin_acked = False
        self._fin_wave_started = False

        # receive side (connection level)
        self.data_rcv_nxt = 0
        self._ranges: list[tuple[int, int, bytes]] = []
        self.data_fin_seq: int | None = None
        self.delivered_bytes = 0
        self._eos_delivered = False

        host.segment_handler = self.on_segment

    # --- wiring used by subflows -------------------------------------------

    def make_detector(self) -> ReorderDetector | None:
        if self.detector_kind is None:
            return None
        return ReorderDetector(self.detector_kind)

    def window_view(self) -> ConnectionWindowView:
        live = (SubflowConnState.ESTABLISHED, SubflowConnState.CLOSING)
        return ConnectionWindowView(
            {sf.sf_id: sf.cwnd for sf in self.subflows if sf.state in live}
        )

    def send_segment(self, seg: Segment, subflow: Subflow | None) -> None:
        self._network_send(seg, self.conn_id, subflow.sf_id if subflow else None)

    def rwnd_allows(self, mapping: DsnMappingRecord) -> bool:
        return mapping.data_seq + mapping.length <= self.data_una + self.rwnd

    def synack_option(self, subflow: Subflow):
        # the first subflow's SYN-ACK echoes the capability option
        if subflow.sf_id == 0 and self.token is not None:
            return Mpc(self.token)
        return None

    def _trace(self, kind: EventKind, **kw) -> None:
        self.tracer.emit(self.sim.now, kind, conn_id=self.conn_id, **kw)

    # --- connection lifecycle -----------------------------------------------

    def connect(self, remote_addr: Address, remote_port: int = SERVER_PORT) -> None:
        """Active open: SYN with the multipath-capable option on the first address pair."""
        if self.phase is not ConnPhase.IDLE:
            raise InvariantError(f"connect() in phase {self.phase.name}")
        if self._token_rng is not None:
            self.token = self._token_rng.bits64() & 0xFFFFFFFF
        else:
            self.token = 0
        self.phase = ConnPhase.HANDSHAKING
        self._trace(EventKind.STATE, detail="conn_handshaking")
        sf = self._new_subflow(self.local_addrs[0], remote_addr, CLIENT_PORT_BASE, remote_port)
        sf.open_active(Mpc(self.token))

    def close(self) -> None:
        """End of data: once everything is acknowledged, send DATA_FIN then close subflows.

        Closing before establishment with nothing left to send aborts the
        connection, resetting any half-open subflow; with data still queued the
        close is deferred until after establishment and drain.
        """
        if self.phase is ConnPhase.IDLE or (
            self.phase is ConnPhase.HANDSHAKING and self._sched_off == len(self._sendbuf)
        ):
            for sf in list(self.subflows):
                if sf.state is not SubflowConnState.CLOSED:
                    self._send_abort_rst(sf)
                    sf.abort()
            self.phase = ConnPhase.CLOSED
            self._trace(EventKind.STATE, detail="conn_closed_aborted")
            return
        self.closing_requested = True
        self.pump()

    def write(self, data: bytes) -> None:
        self._sendbuf.extend(data)
        self.pump()

    # --- segment routing ------------------------------------------------------

    def on_segment(self, seg: Segment) -> None:
        sf = self._by_pair.get((seg.dst_addr, seg.src_addr))
        if sf is not None:
            sf.on_segment_arrival(seg)
            return
        if seg.has(Flags.SYN) and not seg.has(Flags.ACK):
            self._on_unknown_syn(seg)
            return
        if seg.has(Flags.RST):
            return  # nothing to reset
        self._send_rst_for(seg, "no_subflow")

    def _on_unknown_syn(self, seg: Segment) -> None:
        mpc = seg.option(Mpc)
        join = seg.option(Join)
        if self.role == "server" and mpc is not None and not self.subflows:
            self.token = mpc.token
            self.phase = ConnPhase.HANDSHAKING
            self._trace(EventKind.STATE, detail="conn_handshaking")
            sf = self._new_subflow(seg.dst_addr, seg.src_addr, seg.dst_port, seg.src_port)
            sf.open_passive()
            sf.on_segment_arrival(seg)
            return
        if self.role == "server" and join is not None and self.subflows:
            if join.token != self.token:
                self._send_rst_for(seg, "join_bad_token")
                return
            if self._addr_used(seg.dst_addr) or self._addr_used(seg.src_addr):
                self._send_rst_for(seg, "address_in_use")
                return
            sf = self._new_subflow(seg.dst_addr, seg.src_addr, seg.dst_port, seg.src_port)
            sf.open_passive()
            sf.on_segment_arrival(seg)
            return
        self._send_rst_for(seg, "unexpected_syn")

    def _send_rst_for(self, cause: Segment, why: str) -> None:
        rst = Segment(
            src_addr=cause.dst_addr,
            dst_addr=cause.src_addr,
            src_port=cause.dst_port,
            dst_port=cause.src_port,
            seq=cause.ack,
            ack=0,
            flags=Flags.RST,
        )
        self._trace(EventKind.SEND, seq=rst.seq, detail=f"RST {why}")
        self._network_send(rst, self.conn_id, None)

    def _send_abort_rst(self, sf: Subflow) -> None:
        rst = Segment(
            src_addr=sf.local_addr,
            dst_addr=sf.remote_addr,
            src_port=sf.local_port,
            dst_port=sf.remote_port,
            seq=sf.snd_nxt,
            ack=0,
            flags=Flags.RST,
        )
        self._trace(EventKind.SEND, subflow_id=sf.sf_id, seq=rst.seq, detail="RST abort")
        self._network_send(rst, self.conn_id, sf.sf_id)

    def _new_subflow(self, local: Address, remote: Address, local_port: int, remote_port: int) -> Subflow:
        pair = (local, remote)
        if pair in self._by_pair and self._by_pair[pair].state is not SubflowConnState.CLOSED:
            raise InvariantError(f"address pair already in use: {local.quad} -> {remote.quad}")
        sf = Subflow(self, len(self.subflows), local, remote, local_port, remote_port)
        self.subflows.append(sf)
        self._by_pair[pair] = sf
        return sf

    def _addr_used(self, addr: Address) -> bool:
        for sf in self.subflows:
            if sf.state is SubflowConnState.CLOSED:
                continue
            if sf.local_addr == addr or sf.remote_addr == addr:
                return True
        return False

    # --- subflow callbacks -----------------------------------------------------

    def on_subflow_established(self, sf: Subflow, seg: Segment) -> None:
        if self.phase in (ConnPhase.IDLE, ConnPhase.HANDSHAKING):
            self.phase = ConnPhase.ESTABLISHED
            self._trace(EventKind.STATE, detail="conn_established")
        if self.role == "client" and sf.sf_id == 0 and seg.option(Mpc) is None:
            # peer did not confirm multipath capability; stay on one path
            self.single_path_fallback = True
            self._trace(EventKind.STATE, detail="fallback_plain_tcp")
        if not self._advertised and not self.single_path_fallback:
            self._advertised = True
            for addr in self.local_addrs[1:]:
                self.subflows[0].enqueue_addr(addr)
        if self.role == "client" and not self.single_path_fallback:
            self._try_joins()
        self.pump()

    def on_addr_advertised(self, addr: Address) -> None:
        if addr not in self.known_remote_addrs:
            self.known_remote_addrs.append(addr)
            self._trace(EventKind.STATE, detail=f"addr_learned={addr.quad}")
        if self.role == "client" and self.phase is ConnPhase.ESTABLISHED and not self.single_path_fallback:
            self._try_joins()

    def _try_joins(self) -> None:
        """One new subflow per advertised address, keeping every address single-use."""
        for remote in list(self.known_remote_addrs):
            if self._addr_used(remote):
                continue
            local = next((a for a in self.local_addrs if not self._addr_used(a)), None)
            if local is None:
                return
            sf = self._new_subflow(local, remote, CLIENT_PORT_BASE + len(self.subflows) - 1, SERVER_PORT)
            sf.open_active(Join(self.token))

    def on_subflow_state(self, sf: Subflow) -> None:
        self._check_all_closed()

    def on_subflow_dead(self, sf: Subflow) -> None:
        self._check_all_closed()

    def _check_all_closed(self) -> None:
        if (
            self.phase is not ConnPhase.CLOSED
            and self.subflows
            and all(s.state is SubflowConnState.CLOSED for s in self.subflows)
        ):
            self.phase = ConnPhase.CLOSED
            self._trace(EventKind.STATE, detail="conn_closed")
            if self.on_closed is not None:
                self.on_closed()

    def on_data_acked(self, sf: Subflow, records: list[TxRecord]) -> None:
        for rec in records:
            if rec.mapping is not None:
                rec.mapping.acked_at_data_level = True
            if rec.final_data_seq is not None:
                self._data_fin_acked = True
        while self.data_una in self._mappings and self._mappings[self.data_una].acked_at_data_level:
            mapping = self._mappings.pop(self.data_una)
            self.data_una += mapping.length
        if (
            self.phase is ConnPhase.DATA_FIN_SENT
            and self._data_fin_acked
            and self.data_una == self.next_data_seq
            and not self._fin_wave_started
        ):
            self._fin_wave_started = True
            for other in self.subflows:
                if other.state is not SubflowConnState.CLOSED:
                    other.close()

    # --- scheduler ---------------------------------------------------------------

    def pump(self) -> None:
        """Assign queued bytes to subflows and flush whatever the windows allow."""
        if self.phase not in (ConnPhase.ESTABLISHED, ConnPhase.DATA_FIN_SENT):
            return
        while self._sched_off < len(self._sendbuf):
            chunk_len = min(self.mss, len(self._sendbuf) - self._sched_off)
            if self.next_data_seq + chunk_len - self.data_una > self.rwnd:
                break
            sf = self._pick_subflow()
            if sf is None:
                break
            payload = bytes(self._sendbuf[self._sched_off : self._sched_off + chunk_len])
            mapping = DsnMappingRecord(self.next_data_seq, chunk_len, payload)
            self._mappings[mapping.data_seq] = mapping
            self.next_data_seq += chunk_len
            self._sched_off += chunk_len
            sf.enqueue_data(mapping)
            self._trace(
                EventKind.SCHED,
                subflow_id=sf.sf_id,
                seq=mapping.subflow_seq,
                detail=f"data_seq={mapping.data_seq} len={chunk_len}",
            )
        if (
            self.closing_requested
            and self.phase is ConnPhase.ESTABLISHED
            and self._sched_off == len(self._sendbuf)
            and self.data_una == self.next_data_seq
        ):
            sf = next((s for s in self.subflows if s.state is SubflowConnState.ESTABLISHED), None)
            if sf is not None:
                sf.enqueue_data_fin(self.next_data_seq)
                self.phase = ConnPhase.DATA_FIN_SENT
                self._trace(EventKind.STATE, detail=f"data_fin_sent final={self.next_data_seq}")
        for sf in self.subflows:
            sf.try_send()

    def _pick_subflow(self) -> Subflow | None:
        n = len(self.subflows)
        for k in range(n):
            sf = self.subflows[(self.rr_index + k) % n]
            if sf.can_accept_chunk():
                self.rr_index = (self.rr_index + k + 1) % n
                return sf
        return None

    # --- receive side ---------------------------------------------------------------

    def reassemble(self, data_seq: int, chunk: bytes) -> None:
        """Insert a received range, deliver the contiguous prefix, advance the window."""
        if not chunk:
            return
        end = data_seq + len(chunk)
        if end > self.data_rcv_nxt + self.rwnd:
            self._trace(
                EventKind.DROP, seq=data_seq, detail=f"beyond_advertised_window len={len(chunk)}"
            )
            return
        if data_seq < self.data_rcv_nxt:
            if end <= self.data_rcv_nxt:
                return  # complete duplicate
            chunk = chunk[self.data_rcv_nxt - data_seq :]
            data_seq = self.data_rcv_nxt
        pieces = [(data_seq, end, chunk)]
        for rs, re, _ in self._ranges:
            remaining = []
            for s, e, b in pieces:
                if e <= rs or s >= re:
                    remaining.append((s, e, b))
                    continue
                if s < rs:
                    remaining.append((s, rs, b[: rs - s]))
                if e > re:
                    remaining.append((re, e, b[re - s :]))
            pieces = remaining
        self._ranges.extend(p for p in pieces if p[0] < p[1])
        self._ranges.sort(key=lambda r: r[0])

        start = self.data_rcv_nxt
        delivered = bytearray()
        while self._ranges and self._ranges[0][0] == self.data_rcv_nxt:
            _, e, b = self._ranges.pop(0)
            delivered.extend(b)
            self.data_rcv_nxt = e
        if delivered:
            self.delivered_bytes += len(delivered)
            self._trace(
                EventKind.DELIVER, seq=start, ack=self.data_rcv_nxt, detail=f"len={len(delivered)}"
            )
            if self.on_deliver is not None:
                self.on_deliver(bytes(delivered))
        self._check_eos()

    def on_data_fin(self, final_data_seq: int) -> None:
        if self.data_fin_seq is None:
            self.data_fin_seq = final_data_seq
            self._trace(EventKind.STATE, detail=f"data_fin_received final={final_data_seq}")
        self._check_eos()

    def _check_eos(self) -> None:
        if (
            self.data_fin_seq is not None
            and self.data_rcv_nxt == self.data_fin_seq
            and not self._eos_delivered
        ):
            self._eos_delivered = True
            self._trace(EventKind.DONE, detail=f"bytes={self.delivered_bytes}")
            if self.on_eos is not None:
                self.on_eos(self.sim.now)
            # nothing left to receive; close this side's subflows
            for sf in self.subflows:
                if sf.state is not SubflowConnState.CLOSED:
                    sf.close()
