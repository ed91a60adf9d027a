"""CSV trace records.

One row per simulator event of interest, time-ordered, LF line endings,
decimal integers, no quoting (the detail field must not contain commas).
Column semantics vary slightly by event kind and are documented in the
README; cwnd_bytes is always present on CWND rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class EventKind(Enum):
    STATE = "STATE"
    SEND = "SEND"
    RECV = "RECV"
    ACK = "ACK"
    DUPACK = "DUPACK"
    RETX = "RETX"
    RTO = "RTO"
    CWND = "CWND"
    SSTHRESH = "SSTHRESH"
    SPURIOUS_EIFEL = "SPURIOUS_EIFEL"
    SPURIOUS_DSACK = "SPURIOUS_DSACK"
    DSACK_SS_BEGIN = "DSACK_SS_BEGIN"
    DSACK_SS_END = "DSACK_SS_END"
    SCHED = "SCHED"
    DELIVER = "DELIVER"
    DROP = "DROP"
    DONE = "DONE"


CSV_HEADER = "time_us,conn_id,subflow_id,event_kind,seq,ack,cwnd_bytes,ssthresh_bytes,detail"


@dataclass
class TraceRecord:
    time_us: int
    conn_id: int | None
    subflow_id: int | None
    kind: EventKind
    seq: int | None = None
    ack: int | None = None
    cwnd_bytes: int | None = None
    ssthresh_bytes: int | None = None
    detail: str = ""

    def to_csv(self) -> str:
        def cell(v) -> str:
            return "" if v is None else str(v)

        return ",".join(
            (
                str(self.time_us),
                cell(self.conn_id),
                cell(self.subflow_id),
                self.kind.value,
                cell(self.seq),
                cell(self.ack),
                cell(self.cwnd_bytes),
                cell(self.ssthresh_bytes),
                self.detail,
            )
        )


class Tracer:
    """Collects trace rows in event order and renders the CSV."""

    def __init__(self):
        self.rows: list[TraceRecord] = []

    def emit(
        self,
        time_us: int,
        kind: EventKind,
        conn_id: int | None = None,
        subflow_id: int | None = None,
        seq: int | None = None,
        ack: int | None = None,
        cwnd_bytes: int | None = None,
        ssthresh_bytes: int | None = None,
        detail: str = "",
    ) -> None:
        if "," in detail or "\n" in detail:
            raise ValueError(f"detail must not contain commas or newlines: {detail!r}")
        if self.rows and time_us < self.rows[-1].time_us:
            raise ValueError("trace rows must be time-ordered")
        self.rows.append(
            TraceRecord(time_us, conn_id, subflow_id, kind, seq, ack, cwnd_bytes, ssthresh_bytes, detail)
        )

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        lines.extend(row.to_csv() for row in self.rows)
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
