"""Bulk-transfer source and sink driving one connection.

The source writes a deterministic byte pattern (byte i = i mod 256) so the
sink can verify every delivered byte positionally; a running digest over the
stream gives an end-to-end conservation check.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import InvariantError

_PATTERN_BLOCK = bytes(range(256))


def pattern_bytes(offset: int, length: int) -> bytes:
    """The transfer pattern for stream positions [offset, offset + length)."""
    start = offset % 256
    buf = (_PATTERN_BLOCK[start:] + _PATTERN_BLOCK * (length // 256 + 1))[:length]
    return buf


@dataclass
class BulkSourceConfig:
    total_bytes: int
    start_time: int = 0

    def __post_init__(self):
        if self.total_bytes <= 0:
            raise ValueError(f"total_bytes must be positive: {self.total_bytes}")


class BulkSource:
    """Writes the whole file into the connection at start_time, then closes."""

    def __init__(self, sim, conn, config: BulkSourceConfig):
        self.sim = sim
        self.conn = conn
        self.config = config
        self.checksum = hashlib.sha256(pattern_bytes(0, config.total_bytes)).hexdigest()
        sim.schedule(config.start_time - sim.now, self._start)

    def _start(self) -> None:
        self.conn.write(pattern_bytes(0, self.config.total_bytes))
        self.conn.close()


class BulkSink:
    """Verifies the pattern byte-by-byte and keeps a running digest."""

    def __init__(self, expected_total: int):
        self.expected_total = expected_total
        self.received_bytes = 0
        self._digest = hashlib.sha256()
        self.done_time: int | None = None

    def on_deliver(self, data: bytes) -> None:
        expected = pattern_bytes(self.received_bytes, len(data))
        if data != expected:
            raise InvariantError(
                f"payload corruption at stream offset {self.received_bytes}"
            )
        self.received_bytes += len(data)
        if self.received_bytes > self.expected_total:
            raise InvariantError(
                f"sink received {self.received_bytes} bytes, more than the {self.expected_total} sent"
            )
        self._digest.update(data)

    def on_eos(self, now: int) -> None:
        self.done_time = now

    @property
    def checksum(self) -> str:
        return self._digest.hexdigest()
