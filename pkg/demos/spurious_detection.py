"""Delay-spike demo: what each detector does with a spurious retransmission.

Path 1's one-way delay jumps from 10 ms to 150 ms at t = 2 s. The shared
receive window is kept at two segments so the whole RTT jump lands inside one
retransmission-timer interval: the timer fires, the sender retransmits a
segment that was merely late, and the congestion window collapses to one
segment for no reason.

- none:  the collapse sticks; the subflow crawls back via slow start.
- eifel: the timestamp echo exposes the retransmission as spurious and the
         saved window is restored in one step.
- dsack: the receiver's duplicate-SACK exposes it; the window regrows one
         segment per ACK up to the saved value.

Writes one trace per detector (trace_spike_<detector>.csv) for the plot
frontend.
"""

from mptcpsim import run_scenario
from mptcpsim.config import LinkConfig, ScenarioConfig


def spike_config(reorder):
    cfg = ScenarioConfig()
    cfg.links = [
        LinkConfig(),
        LinkConfig(delay_schedule=[(0, 10_000), (2_000_000, 150_000)]),
    ]
    cfg.rwnd = 2800
    cfg.file_size = 200_000
    cfg.reorder = reorder
    cfg.trace_out = f"trace_spike_{reorder}.csv"
    return cfg


def main():
    for reorder in ("none", "eifel", "dsack"):
        cfg = spike_config(reorder)
        result = run_scenario(cfg)
        result.tracer.write(cfg.trace_out)
        spurious = sum(st.spurious_detections for st in result.subflows)
        retx = sum(st.retransmissions for st in result.subflows)
        print(f"{reorder:6s} finish={result.finish_time_us / 1e6:7.3f}s "
              f"retransmissions={retx} spurious_detected={spurious} "
              f"trace={cfg.trace_out}")
        for row in result.tracer.rows:
            if row.kind.value in ("SPURIOUS_EIFEL", "SPURIOUS_DSACK") and row.conn_id == 0:
                print(f"         t={row.time_us / 1e6:.3f}s subflow={row.subflow_id} "
                      f"{row.kind.value} {row.detail}")


if __name__ == "__main__":
    main()
