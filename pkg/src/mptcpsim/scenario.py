"""Scenario runner: build the two-host topology, run the transfer, collect results.

Link i connects client address 10.1.i.1 to server address 10.2.i.1. The
client is trace endpoint 0, the server endpoint 1; segments are encoded to
bytes before entering a link and decoded on delivery, so the wire format and
serialization delays are exercised on every packet.
"""

from __future__ import annotations

from dataclasses import dataclass

from .app import BulkSink, BulkSource, BulkSourceConfig
from .ccontrol import CcAlgorithm
from .config import ScenarioConfig
from .mptcp import MptcpConnection
from .netmodel import Address, Host, Link
from .reorder import DetectorKind
from .simcore import Simulator
from .trace import EventKind, Tracer
from .wire import Segment, decode, encode

TOKEN_STREAM_TAG = 0x70CE


@dataclass
class SubflowStats:
    subflow_id: int
    bytes_sent: int
    retransmissions: int
    spurious_detections: int


@dataclass
class ScenarioResult:
    completed: bool
    finish_time_us: int | None
    goodput_bps: float | None
    subflows: list[SubflowStats]
    checksum_ok: bool
    tracer: Tracer
    events_processed: int

    def summary_line(self) -> str:
        if self.completed:
            parts = [
                f"finish_time_s={self.finish_time_us / 1_000_000:.6f}",
                f"goodput_bps={int(round(self.goodput_bps))}",
            ]
        else:
            parts = ["finish_time_s=n/a", "goodput_bps=n/a"]
        for st in self.subflows:
            parts.append(
                f"subflow{st.subflow_id}"
                f" bytes_sent={st.bytes_sent}"
                f" retransmissions={st.retransmissions}"
                f" spurious_detections={st.spurious_detections}"
            )
        return " ".join(parts)


class SegmentNetwork:
    """Glue between connections and links: encode, transmit, decode, trace drops."""

    def __init__(self, sim: Simulator, tracer: Tracer):
        self.sim = sim
        self.tracer = tracer
        self._links: dict[tuple[Address, Address], Link] = {}
        self._hosts: dict[Address, Host] = {}

    def add_link(self, link: Link, host_a: Host, host_b: Host) -> None:
        a, b = link.endpoints()
        self._links[(a, b)] = link
        self._links[(b, a)] = link
        self._hosts[a] = host_a
        self._hosts[b] = host_b

    def send(self, seg: Segment, conn_id: int | None, subflow_id: int | None) -> None:
        link = self._links.get((seg.src_addr, seg.dst_addr))
        if link is None:
            raise ValueError(f"no link between {seg.src_addr.quad} and {seg.dst_addr.quad}")
        data = encode(seg)
        dst_host = self._hosts[seg.dst_addr]

        def deliver():
            dst_host.receive(decode(data))

        at = link.transmit(self.sim, self.sim.rng, seg.src_addr, len(data), deliver)
        if at is None:
            self.tracer.emit(
                self.sim.now,
                EventKind.DROP,
                conn_id=conn_id,
                subflow_id=subflow_id,
                seq=seg.seq,
                ack=seg.ack,
                detail=f"loss len={len(data)}",
            )


@dataclass
class SimulationBundle:
    sim: Simulator
    tracer: Tracer
    network: SegmentNetwork
    links: list[Link]
    client: MptcpConnection
    server: MptcpConnection
    source: BulkSource
    sink: BulkSink
    config: ScenarioConfig


def build_simulation(config: ScenarioConfig) -> SimulationBundle:
    sim = Simulator(seed=config.seed)
    tracer = Tracer()
    network = SegmentNetwork(sim, tracer)

    n_links = len(config.links)
    client_host = Host(1, n_links)
    server_host = Host(2, n_links)
    links = []
    for i, link_cfg in enumerate(config.links):
        link = Link(
            client_host.addresses[i],
            server_host.addresses[i],
            link_cfg.bandwidth_bps,
            link_cfg.delay_schedule,
            link_cfg.loss_rate,
        )
        links.append(link)
        network.add_link(link, client_host, server_host)

    cc = CcAlgorithm.from_name(config.cc, a=config.a, rttc_second_term=config.rttc_second_term)
    detector_kind = DetectorKind(config.reorder)
    common = dict(
        mss=config.mss,
        rwnd=config.rwnd,
        dupthresh=config.dupthresh,
        cc=cc,
        detector_kind=detector_kind,
        cc_ack_granularity=config.cc_ack_granularity,
    )

    sink = BulkSink(expected_total=config.file_size)

    def on_eos(now: int) -> None:
        sink.on_eos(now)

    client = MptcpConnection(
        0,
        sim,
        tracer,
        client_host,
        network.send,
        role="client",
        token_rng=sim.rng.derive(TOKEN_STREAM_TAG),
        **common,
    )
    server = MptcpConnection(
        1,
        sim,
        tracer,
        server_host,
        network.send,
        role="server",
        on_deliver=sink.on_deliver,
        on_eos=on_eos,
        **common,
    )

    source_cfg = BulkSourceConfig(total_bytes=config.file_size, start_time=0)
    sim.schedule(0, lambda: client.connect(server_host.addresses[0]))
    source = BulkSource(sim, client, source_cfg)

    return SimulationBundle(sim, tracer, network, links, client, server, source, sink, config)


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Run one deterministic simulation to completion or the time limit."""
    bundle = build_simulation(config)
    summary = bundle.sim.run_until(config.sim_time_limit)

    sink = bundle.sink
    completed = sink.done_time is not None and sink.received_bytes == config.file_size
    checksum_ok = completed and sink.checksum == bundle.source.checksum
    finish = sink.done_time if completed else None
    goodput = None
    if completed and finish and finish > 0:
        goodput = config.file_size * 8 * 1_000_000 / finish
    stats = [
        SubflowStats(sf.sf_id, sf.bytes_sent, sf.retransmissions, sf.spurious_detections)
        for sf in bundle.client.subflows
    ]
    return ScenarioResult(
        completed=completed,
        finish_time_us=finish,
        goodput_bps=goodput,
        subflows=stats,
        checksum_ok=checksum_ok,
        tracer=bundle.tracer,
        events_processed=summary.events_processed,
    )
