"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion lines.
"""

import random
import time
from contextlib import contextmanager

import pytest

from mptcpsim import cli
from mptcpsim.ccontrol import CcAlgorithm, ConnectionWindowView, ack_increment, on_ack, on_loss
from mptcpsim.config import LinkConfig, ScenarioConfig
from mptcpsim.errors import InvariantError
from mptcpsim.mptcp import MptcpConnection
from mptcpsim.netmodel import Address
from mptcpsim.reorder import DetectorKind
from mptcpsim.scenario import run_scenario
from mptcpsim.simcore import Simulator
from mptcpsim.subflow import Subflow, SubflowConnState
from mptcpsim.trace import EventKind
from mptcpsim.wire import AddAddr, DataFin, Dsn, Flags, Join, Mpc, Sack, Segment, Timestamp

from helpers import StubConn, spike_config

MSS = 1400


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name}")
        raise
    print(f"ACCEPTANCE PASS: {name}")


# --- criterion 1: formula oracle suite -----------------------------------------

def _oracle_ack(kind: str, a: float, w_r: float, w: float, second: str = "total") -> float:
    if kind == "uncoupled":
        return w_r + 1.0 / w_r
    if kind == "fully_coupled":
        return w_r + 1.0 / w
    if kind == "linked_increases":
        return w_r + a / w
    if kind == "rtt_compensator":
        other = 1.0 / w if second == "total" else 1.0 / w_r
        return w_r + min(a / w, other)
    raise AssertionError(kind)


def _oracle_loss(kind: str, w_r: float, w: float) -> float:
    if kind == "fully_coupled":
        return max(w_r - w / 2.0, 1.0)
    return max(w_r / 2.0, 1.0)


def test_formula_oracle_suite():
    with criterion("formula oracle suite (1000 randomized states, <=1e-12 rel err, <1s)"):
        rng = random.Random(424242)
        started = time.perf_counter()
        for _ in range(1000):
            kind = rng.choice(
                ("uncoupled", "fully_coupled", "linked_increases", "rtt_compensator")
            )
            a = rng.uniform(0.05, 4.0)
            w_r = rng.uniform(1.0, 100.0)
            w = w_r + rng.uniform(0.0, 200.0)
            alg = CcAlgorithm.from_name(kind, a=a)
            view = ConnectionWindowView({0: w_r, 1: w - w_r})
            got_ack = on_ack(alg, view, 0)
            want_ack = _oracle_ack(kind, a, w_r, w)
            assert abs(got_ack - want_ack) <= 1e-12 * abs(want_ack)
            got_loss = on_loss(alg, view, 0)
            want_loss = _oracle_loss(kind, w_r, w)
            assert abs(got_loss - want_loss) <= 1e-12 * abs(want_loss)
        elapsed = time.perf_counter() - started
        assert elapsed < 1.0, f"oracle suite took {elapsed:.3f}s"


# --- criterion 2: single-path equivalence ---------------------------------------

def test_single_path_equivalence():
    with criterion("single-path equivalence (coupled algorithms with a=1 match uncoupled exactly)"):
        uncoupled = CcAlgorithm.from_name("uncoupled")
        coupled = [
            CcAlgorithm.from_name("fully_coupled"),
            CcAlgorithm.from_name("linked_increases", a=1.0),
            CcAlgorithm.from_name("rtt_compensator", a=1.0),
        ]
        w = 1.0
        for _ in range(500):
            base = ack_increment(uncoupled, w, w)
            for alg in coupled:
                assert ack_increment(alg, w, w) == base  # exact float equality
            w += base

        # whole-run cross-check: with one path the traces are byte-identical
        def single_path_trace(cc_name):
            cfg = ScenarioConfig()
            cfg.links = [LinkConfig()]
            cfg.file_size = 60_000
            cfg.cc = cc_name
            cfg.a = 1.0
            result = run_scenario(cfg)
            assert result.completed
            return result.tracer.to_csv()

        reference = single_path_trace("uncoupled")
        for name in ("fully_coupled", "linked_increases", "rtt_compensator"):
            assert single_path_trace(name) == reference


# --- criterion 3: goal-1 throughput ----------------------------------------------

def test_goal1_throughput():
    with criterion("goal-1 throughput (single path >=90% capacity; two paths >=1.8x single)"):
        single = ScenarioConfig()
        single.links = [LinkConfig()]
        single.cc = "linked_increases"
        t0 = time.perf_counter()
        single_result = run_scenario(single)
        single_elapsed = time.perf_counter() - t0
        assert single_result.completed and single_result.checksum_ok
        assert single_result.goodput_bps >= 0.9 * 500_000
        assert single_elapsed < 10.0

        dual = ScenarioConfig()
        dual.cc = "linked_increases"
        t0 = time.perf_counter()
        dual_result = run_scenario(dual)
        dual_elapsed = time.perf_counter() - t0
        assert dual_result.completed and dual_result.checksum_ok
        assert dual_result.goodput_bps >= 1.8 * single_result.goodput_bps
        assert dual_elapsed < 10.0


# --- criterion 4: conservation oracle over the scenario matrix --------------------

def test_conservation_matrix():
    with criterion("conservation + determinism (4 cc x 3 detectors x loss {0, 0.01})"):
        for cc in ("uncoupled", "fully_coupled", "linked_increases", "rtt_compensator"):
            for reorder in ("none", "eifel", "dsack"):
                for loss in (0.0, 0.01):
                    cfg = ScenarioConfig()
                    cfg.cc = cc
                    cfg.reorder = reorder
                    cfg.file_size = 300_000
                    for link in cfg.links:
                        link.loss_rate = loss
                    first = run_scenario(cfg)
                    tag = f"{cc}/{reorder}/loss={loss}"
                    assert first.completed, tag
                    assert first.checksum_ok, tag
                    second = run_scenario(cfg)
                    assert first.tracer.to_csv() == second.tracer.to_csv(), tag


# --- criteria 5 and 6: detector behavior in the delay-spike scenario ---------------

def _rows_for(result, conn_id, subflow_id):
    return [
        row
        for row in result.tracer.rows
        if row.conn_id == conn_id and row.subflow_id == subflow_id
    ]


def _detail_value(row, key):
    for part in row.detail.split():
        if part.startswith(key + "="):
            return int(part.split("=", 1)[1])
    raise AssertionError(f"no {key} in {row.detail!r}")


def test_eifel_restoration():
    with criterion("eifel restoration (spurious detected; window restored to the saved value)"):
        result = run_scenario(spike_config("eifel"))
        assert result.completed and result.checksum_ok
        rows = _rows_for(result, 0, 1)  # client subflow on the spiking path
        spurious = [r for r in rows if r.kind is EventKind.SPURIOUS_EIFEL]
        assert len(spurious) >= 1

        first_retx_at = next(i for i, r in enumerate(rows) if r.kind is EventKind.RETX)
        pre_retx_cwnd = next(
            r.cwnd_bytes for r in reversed(rows[:first_retx_at]) if r.kind is EventKind.CWND
        )
        spur_at = next(i for i, r in enumerate(rows) if r.kind is EventKind.SPURIOUS_EIFEL)
        following_cwnd = next(
            r.cwnd_bytes for r in rows[spur_at + 1 :] if r.kind is EventKind.CWND
        )
        assert following_cwnd == pre_retx_cwnd
        assert _detail_value(rows[spur_at], "restored_cwnd_bytes") == pre_retx_cwnd
        # hand check on the construction (see spike_config): a chunk sent at
        # t0 > 2s is acknowledged at t0 + 23.04ms + 150ms + 0.93ms + 150ms
        # ~= t0 + 324ms, while the timer (srtt ~= 44-67ms pre-spike, 200ms
        # floor) fires around t0 + 200ms; the retransmission must precede
        # the ACK that clears it.
        rto_time = next(r.time_us for r in rows if r.kind is EventKind.RTO)
        spur_time = rows[spur_at].time_us
        assert 2_000_000 < rto_time < spur_time < rto_time + 400_000


def test_dsack_slow_start():
    with criterion("dsack slow start (+1 segment per ACK up to the saved value, clamped)"):
        result = run_scenario(spike_config("dsack"))
        assert result.completed and result.checksum_ok
        rows = _rows_for(result, 0, 1)
        assert any(r.kind is EventKind.SPURIOUS_DSACK for r in rows)

        first_retx_at = next(i for i, r in enumerate(rows) if r.kind is EventKind.RETX)
        saved_cwnd = next(
            r.cwnd_bytes for r in reversed(rows[:first_retx_at]) if r.kind is EventKind.CWND
        )

        spans = []
        begin = None
        for i, row in enumerate(rows):
            if row.kind is EventKind.DSACK_SS_BEGIN:
                begin = i
            elif row.kind is EventKind.DSACK_SS_END and begin is not None:
                if row.detail != "aborted_by_loss":
                    spans.append((begin, i))
                begin = None
        assert spans, "no completed regrowth phase"

        for begin, end in spans:
            target = _detail_value(rows[begin], "target_cwnd_bytes")
            assert target == saved_cwnd
            start_cwnd = rows[begin].cwnd_bytes
            values = [r.cwnd_bytes for r in rows[begin + 1 : end] if r.kind is EventKind.CWND]
            assert values, "phase recorded no window growth"
            previous = start_cwnd
            for value in values:
                assert value <= target  # never exceeds the saved window
                assert value - previous == MSS or value == target
                previous = value
            assert values[-1] == target  # ends clamped exactly at the saved value


# --- criterion 7: state-machine conformance under fuzzed schedules ------------------

def _random_segment(rng, local, remote, sf=None):
    options = []
    if rng.random() < 0.2:
        options.append(Mpc(rng.getrandbits(32)))
    if rng.random() < 0.2:
        options.append(Join(rng.getrandbits(32)))
    if rng.random() < 0.2:
        options.append(AddAddr(Address(rng.randint(0, 3), rng.randint(0, 3))))
    if rng.random() < 0.2:
        options.append(DataFin(rng.getrandbits(20)))
    if rng.random() < 0.5:
        options.append(Timestamp(rng.getrandbits(30), rng.getrandbits(30)))
    if rng.random() < 0.3:
        left = rng.getrandbits(16)
        options.append(Sack(((left, left + rng.randint(1, 5000)),)))
    payload = bytes(rng.randint(0, 2 * MSS)) if rng.random() < 0.5 else b""
    dsn_bias = rng.random()
    if payload and dsn_bias < 0.7:
        options.append(Dsn(rng.getrandbits(20), rng.getrandbits(16), len(payload)))
    anchors = [0, 1, MSS, 2 * MSS, rng.getrandbits(32)]
    if sf is not None:
        anchors += [sf.rcv_nxt, sf.snd_una, sf.snd_nxt]
    return Segment(
        src_addr=remote,
        dst_addr=local,
        src_port=rng.randint(0, 65535),
        dst_port=rng.randint(0, 65535),
        seq=rng.choice(anchors) % (1 << 32),
        ack=rng.choice(anchors) % (1 << 32),
        flags=Flags(rng.randint(0, 15)),
        options=tuple(options),
        payload=payload,
    )


def _fuzz_subflow_schedule(rng):
    conn = StubConn(detector_kind=rng.choice(list(DetectorKind)))
    sf = Subflow(conn, 0, Address(1, 0), Address(2, 0), 49152, 5001)
    conn.subflows.append(sf)
    opening = rng.random()
    if opening < 0.35:
        sf.open_active(Mpc(7))
    elif opening < 0.7:
        sf.open_passive()
    elif opening < 0.9:
        sf.state = SubflowConnState.ESTABLISHED
        sf.cwnd = rng.uniform(1.0, 20.0)
    for _ in range(rng.randint(1, 6)):
        action = rng.random()
        if action < 0.75:
            sf.on_segment_arrival(_random_segment(rng, sf.local_addr, sf.remote_addr, sf))
        elif action < 0.85:
            sf.close()
        elif action < 0.95 and sf._inflight:
            sf.on_rto()
        else:
            from helpers import Chunk

            sf.enqueue_data(Chunk(rng.getrandbits(16), bytes(rng.randint(1, MSS))))
            sf.try_send()


def _fuzz_connection_schedule(rng):
    sim = Simulator(seed=rng.getrandbits(32))
    from mptcpsim.netmodel import Host
    from mptcpsim.trace import Tracer

    host = Host(2, 2)
    conn = MptcpConnection(
        1, sim, Tracer(), host, lambda seg, c, s: None, role="server",
        detector_kind=rng.choice(list(DetectorKind)),
    )
    for _ in range(rng.randint(1, 6)):
        local = rng.choice(host.addresses)
        remote = Address(1, rng.randint(0, 1))
        conn.on_segment(_random_segment(rng, local, remote))


def test_state_machine_conformance_under_fuzz(monkeypatch):
    with criterion("state-machine conformance (10k fuzzed schedules, no illegal transitions)"):
        rng = random.Random(777)
        for i in range(8000):
            _fuzz_subflow_schedule(rng)  # InvariantError would fail the criterion
        for i in range(2000):
            _fuzz_connection_schedule(rng)

        # a violation, were one ever raised, aborts the run with exit code 2
        def breach(config):
            raise InvariantError("illegal subflow transition (synthetic)")

        monkeypatch.setattr(cli, "run_scenario", breach)
        assert cli.main([]) == 2
