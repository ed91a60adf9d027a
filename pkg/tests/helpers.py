"""Shared fixtures: a stub connection for subflow-level tests and config builders."""

from __future__ import annotations

from mptcpsim.ccontrol import CcAlgorithm, ConnectionWindowView
from mptcpsim.config import LinkConfig, ScenarioConfig
from mptcpsim.netmodel import Address
from mptcpsim.reorder import DetectorKind, ReorderDetector
from mptcpsim.simcore import Simulator
from mptcpsim.subflow import Subflow, SubflowConnState
from mptcpsim.trace import Tracer
from mptcpsim.wire import Dsn, Flags, Segment, Timestamp

CLIENT_ADDR = Address(1, 0)
SERVER_ADDR = Address(2, 0)


class StubConn:
    """Minimal connection double exposing everything a Subflow needs."""

    def __init__(
        self,
        mss: int = 1400,
        rwnd: int = 65536,
        dupthresh: int = 3,
        cc: CcAlgorithm | None = None,
        detector_kind: DetectorKind | None = DetectorKind.NONE,
        cc_ack_granularity: str = "per_mss",
    ):
        self.sim = Simulator(seed=1)
        self.tracer = Tracer()
        self.conn_id = 0
        self.mss = mss
        self.rwnd = rwnd
        self.dupthresh = dupthresh
        self.cc = cc if cc is not None else CcAlgorithm.from_name("uncoupled")
        self.detector_kind = detector_kind
        self.cc_ack_granularity = cc_ack_granularity
        self.subflows: list[Subflow] = []

        self.sent: list[Segment] = []
        self.reassembled: list[tuple[int, bytes]] = []
        self.acked_batches: list[list] = []
        self.advertised: list[Address] = []
        self.data_fins: list[int] = []
        self.established: list[Subflow] = []
        self.dead: list[Subflow] = []
        self.rwnd_open = True

    def make_detector(self):
        if self.detector_kind is None:
            return None
        return ReorderDetector(self.detector_kind)

    def window_view(self) -> ConnectionWindowView:
        live = (SubflowConnState.ESTABLISHED, SubflowConnState.CLOSING)
        return ConnectionWindowView({sf.sf_id: sf.cwnd for sf in self.subflows if sf.state in live})

    def send_segment(self, seg, subflow):
        self.sent.append(seg)

    def rwnd_allows(self, mapping):
        return self.rwnd_open

    def reassemble(self, data_seq, chunk):
        self.reassembled.append((data_seq, chunk))

    def on_data_acked(self, sf, records):
        self.acked_batches.append(records)

    def on_addr_advertised(self, addr):
        self.advertised.append(addr)

    def on_data_fin(self, final):
        self.data_fins.append(final)

    def on_subflow_established(self, sf, seg):
        self.established.append(sf)

    def on_subflow_state(self, sf):
        pass

    def on_subflow_dead(self, sf):
        self.dead.append(sf)

    def pump(self):
        pass

    def synack_option(self, sf):
        return None


def make_subflow(
    conn: StubConn | None = None, state=SubflowConnState.ESTABLISHED, cwnd: float = 10.0, **conn_kw
) -> Subflow:
    """A subflow dropped directly into the given state with clean sequence spaces."""
    conn = conn or StubConn(**conn_kw)
    sf = Subflow(conn, 0, CLIENT_ADDR, SERVER_ADDR, 49152, 5001)
    sf.state = state
    sf.cwnd = cwnd
    conn.subflows.append(sf)
    return sf


class Chunk:
    """Stand-in for a DSN mapping record."""

    def __init__(self, data_seq: int, payload: bytes):
        self.data_seq = data_seq
        self.payload = payload
        self.length = len(payload)
        self.subflow_id = None
        self.subflow_seq = None
        self.acked_at_data_level = False


def data_segment(sf: Subflow, seq: int, payload: bytes, data_seq: int | None = None, ts_val: int = 0) -> Segment:
    """A data segment addressed to sf, carrying a DSN mapping and a timestamp."""
    options = [
        Dsn(data_seq if data_seq is not None else seq, seq, len(payload)),
        Timestamp(ts_val=ts_val, ts_echo=0),
    ]
    return Segment(
        src_addr=sf.remote_addr,
        dst_addr=sf.local_addr,
        src_port=sf.remote_port,
        dst_port=sf.local_port,
        seq=seq,
        ack=sf.snd_nxt,
        flags=Flags.ACK,
        options=tuple(options),
        payload=payload,
    )


def ack_segment(sf: Subflow, ack: int, sack_blocks=None, ts_echo: int = 0) -> Segment:
    options = [Timestamp(ts_val=0, ts_echo=ts_echo)]
    if sack_blocks:
        from mptcpsim.wire import Sack

        options.append(Sack(tuple(sack_blocks)))
    return Segment(
        src_addr=sf.remote_addr,
        dst_addr=sf.local_addr,
        src_port=sf.remote_port,
        dst_port=sf.local_port,
        seq=0,
        ack=ack,
        flags=Flags.ACK,
        options=tuple(options),
    )


def fill_flight(sf: Subflow, n_segments: int, mss: int = 1400) -> list:
    """Enqueue and transmit n_segments full-size chunks."""
    chunks = []
    for i in range(n_segments):
        chunk = Chunk(i * mss, bytes(mss))
        sf.enqueue_data(chunk)
        chunks.append(chunk)
    sf.try_send()
    return chunks


def spike_config(reorder: str, file_size: int = 200_000, rwnd: int = 2800) -> ScenarioConfig:
    """Two equal paths; path 1's one-way delay jumps 10 ms -> 150 ms at t = 2 s.

    The small shared window keeps one segment in flight per subflow, so the
    full two-way RTT jump (~280 ms) lands inside a single 200 ms RTO interval
    instead of being split across staggered ACKs.
    """
    cfg = ScenarioConfig()
    cfg.links = [
        LinkConfig(),
        LinkConfig(delay_schedule=[(0, 10_000), (2_000_000, 150_000)]),
    ]
    cfg.rwnd = rwnd
    cfg.file_size = file_size
    cfg.reorder = reorder
    return cfg
