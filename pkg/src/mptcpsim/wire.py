"""Segment and option encoding.

The framing is simulator-internal: a fixed 40-byte header followed by
length-prefixed options (1-byte kind tag, 1-byte body length) and the payload.
Encoded size feeds the link serialization-delay model, so the header overhead
is deliberately TCP/IP-sized.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntFlag

from .netmodel import Address

MOD32 = 1 << 32
HEADER_LEN = 40

_HEADER = struct.Struct("!HHIIBBHII16x")
assert _HEADER.size == HEADER_LEN


class MalformedSegment(Exception):
    """Raised when a byte string cannot be decoded into a valid segment."""


class Flags(IntFlag):
    SYN = 0x1
    ACK = 0x2
    FIN = 0x4
    RST = 0x8


def seq_add(a: int, n: int) -> int:
    return (a + n) % MOD32


def seq_lt(a: int, b: int) -> bool:
    """a < b in 32-bit serial-number arithmetic."""
    return a != b and ((b - a) % MOD32) < (1 << 31)


def seq_le(a: int, b: int) -> bool:
    return a == b or seq_lt(a, b)


def seq_rel(a: int, base: int) -> int:
    """Signed distance from base to a (positive when a is ahead of base)."""
    return ((a - base + (1 << 31)) % MOD32) - (1 << 31)


# --- options -----------------------------------------------------------------

KIND_MPC = 1
KIND_JOIN = 2
KIND_ADD_ADDR = 3
KIND_REMOVE_ADDR = 4
KIND_DSN = 5
KIND_DATA_FIN = 6
KIND_TIMESTAMP = 7
KIND_SACK = 8


@dataclass(frozen=True)
class Mpc:
    token: int
    kind = KIND_MPC


@dataclass(frozen=True)
class Join:
    token: int
    kind = KIND_JOIN


@dataclass(frozen=True)
class AddAddr:
    address: Address
    kind = KIND_ADD_ADDR


@dataclass(frozen=True)
class RemoveAddr:
    address: Address
    kind = KIND_REMOVE_ADDR


@dataclass(frozen=True)
class Dsn:
    """Maps payload bytes at subflow_seq to the connection-level sequence space."""

    data_seq: int
    subflow_seq: int
    length: int
    kind = KIND_DSN


@dataclass(frozen=True)
class DataFin:
    final_data_seq: int
    kind = KIND_DATA_FIN


@dataclass(frozen=True)
class Timestamp:
    ts_val: int
    ts_echo: int
    kind = KIND_TIMESTAMP


@dataclass(frozen=True)
class Sack:
    """Up to four (left, right) byte ranges, half-open, each left < right."""

    blocks: tuple[tuple[int, int], ...]
    kind = KIND_SACK


Option = Mpc | Join | AddAddr | RemoveAddr | Dsn | DataFin | Timestamp | Sack


@dataclass
class Segment:
    src_addr: Address
    dst_addr: Address
    src_port: int
    dst_port: int
    seq: int
    ack: int
    flags: Flags
    options: tuple[Option, ...] = ()
    payload: bytes = b""

    @property
    def payload_len(self) -> int:
        return len(self.payload)

    def option(self, cls) -> Option | None:
        for opt in self.options:
            if isinstance(opt, cls):
                return opt
        return None

    def has(self, flag: Flags) -> bool:
        return bool(self.flags & flag)


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise MalformedSegment(message)


def validate(segment: Segment) -> None:
    """Enforce the structural invariants shared by encode and decode."""
    _check(0 <= segment.src_port < 65536 and 0 <= segment.dst_port < 65536, "bad port")
    _check(0 <= segment.seq < MOD32 and 0 <= segment.ack < MOD32, "sequence out of range")
    _check(segment.payload_len <= 0xFFFF, "payload too long")
    _check(int(segment.flags) & ~0xF == 0, "unknown flag bits")
    kinds = [opt.kind for opt in segment.options]
    _check(len(kinds) == len(set(kinds)), "duplicate option kind")
    for opt in segment.options:
        if isinstance(opt, (Mpc, Join)):
            _check(0 <= opt.token < MOD32, "token out of range")
        elif isinstance(opt, Dsn):
            _check(opt.length > 0, "DSN length must be positive")
            _check(opt.length <= 0xFFFF, "DSN length too large")
            _check(0 <= opt.subflow_seq < MOD32, "DSN subflow seq out of range")
            _check(0 <= opt.data_seq < (1 << 64), "DSN data seq out of range")
        elif isinstance(opt, DataFin):
            _check(0 <= opt.final_data_seq < (1 << 64), "final data seq out of range")
        elif isinstance(opt, Timestamp):
            _check(0 <= opt.ts_val < (1 << 64) and 0 <= opt.ts_echo < (1 << 64), "timestamp range")
        elif isinstance(opt, Sack):
            _check(0 < len(opt.blocks) <= 4, "SACK needs 1..4 blocks")
            for left, right in opt.blocks:
                _check(0 <= left < MOD32 and 0 <= right < MOD32, "SACK block range")
                _check(left < right, "SACK block left must be below right")


def _encode_option(opt: Option) -> bytes:
    if isinstance(opt, Mpc):
        body = struct.pack("!I", opt.token)
    elif isinstance(opt, Join):
        body = struct.pack("!I", opt.token)
    elif isinstance(opt, AddAddr):
        body = struct.pack("!I", opt.address.pack())
    elif isinstance(opt, RemoveAddr):
        body = struct.pack("!I", opt.address.pack())
    elif isinstance(opt, Dsn):
        body = struct.pack("!QIH", opt.data_seq, opt.subflow_seq, opt.length)
    elif isinstance(opt, DataFin):
        body = struct.pack("!Q", opt.final_data_seq)
    elif isinstance(opt, Timestamp):
        body = struct.pack("!QQ", opt.ts_val, opt.ts_echo)
    elif isinstance(opt, Sack):
        body = struct.pack("!B", len(opt.blocks))
        for left, right in opt.blocks:
            body += struct.pack("!II", left, right)
    else:
        raise MalformedSegment(f"unknown option type: {opt!r}")
    return bytes([opt.kind, len(body)]) + body


def _decode_option(kind: int, body: bytes) -> Option:
    try:
        if kind == KIND_MPC:
            return Mpc(struct.unpack("!I", body)[0])
        if kind == KIND_JOIN:
            return Join(struct.unpack("!I", body)[0])
        if kind == KIND_ADD_ADDR:
            return AddAddr(Address.unpack(struct.unpack("!I", body)[0]))
        if kind == KIND_REMOVE_ADDR:
            return RemoveAddr(Address.unpack(struct.unpack("!I", body)[0]))
        if kind == KIND_DSN:
            return Dsn(*struct.unpack("!QIH", body))
        if kind == KIND_DATA_FIN:
            return DataFin(struct.unpack("!Q", body)[0])
        if kind == KIND_TIMESTAMP:
            return Timestamp(*struct.unpack("!QQ", body))
        if kind == KIND_SACK:
            count = body[0]
            _check(len(body) == 1 + 8 * count, "SACK body length mismatch")
            blocks = tuple(
                struct.unpack("!II", body[1 + 8 * i : 9 + 8 * i]) for i in range(count)
            )
            return Sack(blocks)
    except (struct.error, ValueError, IndexError) as exc:
        raise MalformedSegment(f"bad option body for kind {kind}: {exc}") from exc
    raise MalformedSegment(f"unknown option kind: {kind}")


def encode(segment: Segment) -> bytes:
    """Serialize a valid segment; inverse of decode."""
    validate(segment)
    opts = b"".join(_encode_option(o) for o in segment.options)
    header = _HEADER.pack(
        segment.src_port,
        segment.dst_port,
        segment.seq,
        segment.ack,
        int(segment.flags),
        len(segment.options),
        segment.payload_len,
        segment.src_addr.pack(),
        segment.dst_addr.pack(),
    )
    return header + opts + segment.payload


def decode(data: bytes) -> Segment:
    """Parse bytes produced by encode; raises MalformedSegment on anything else."""
    _check(len(data) >= HEADER_LEN, f"truncated header: {len(data)} bytes")
    src_port, dst_port, seq, ack, flags, n_options, payload_len, src_w, dst_w = _HEADER.unpack(
        data[:HEADER_LEN]
    )
    _check(flags & ~0xF == 0, "unknown flag bits")
    try:
        src_addr = Address.unpack(src_w)
        dst_addr = Address.unpack(dst_w)
    except ValueError as exc:
        raise MalformedSegment(str(exc)) from exc
    offset = HEADER_LEN
    options: list[Option] = []
    for _ in range(n_options):
        _check(len(data) >= offset + 2, "truncated option header")
        kind, body_len = data[offset], data[offset + 1]
        offset += 2
        _check(len(data) >= offset + body_len, "truncated option body")
        options.append(_decode_option(kind, data[offset : offset + body_len]))
        offset += body_len
    _check(len(data) == offset + payload_len, "payload length mismatch")
    segment = Segment(
        src_addr=src_addr,
        dst_addr=dst_addr,
        src_port=src_port,
        dst_port=dst_port,
        seq=seq,
        ack=ack,
        flags=Flags(flags),
        options=tuple(options),
        payload=data[offset:],
    )
    validate(segment)
    return segment


def encoded_size(segment: Segment) -> int:
    """Wire size in bytes: fixed header plus actual option bytes plus payload."""
    return HEADER_LEN + sum(len(_encode_option(o)) for o in segment.options) + segment.payload_len
