"""Wire format: roundtrips, malformed input, size accounting."""

import random

import pytest

from mptcpsim.netmodel import Address
from mptcpsim.wire import (
    HEADER_LEN,
    AddAddr,
    DataFin,
    Dsn,
    Flags,
    Join,
    MalformedSegment,
    Mpc,
    RemoveAddr,
    Sack,
    Segment,
    Timestamp,
    decode,
    encode,
    encoded_size,
    seq_add,
    seq_lt,
    seq_rel,
)

A1 = Address(1, 0)
B1 = Address(2, 0)


def seg(**kw):
    args = dict(
        src_addr=A1, dst_addr=B1, src_port=49152, dst_port=5001,
        seq=0, ack=0, flags=Flags.SYN,
    )
    args.update(kw)
    return Segment(**args)


class TestRoundtrip:
    def test_syn_with_capability_option(self):
        s = seg(options=(Mpc(0xDEADBEEF), Timestamp(5, 0)))
        assert decode(encode(s)) == s

    def test_data_segment_with_mapping(self):
        s = seg(
            flags=Flags.ACK,
            seq=500,
            ack=1,
            options=(Dsn(data_seq=1000, subflow_seq=500, length=1400), Timestamp(77, 33)),
            payload=bytes(1400),
        )
        assert decode(encode(s)) == s

    def test_every_option_kind(self):
        s = seg(
            flags=Flags.ACK | Flags.FIN,
            options=(
                Mpc(1), Join(2), AddAddr(Address(1, 1)), RemoveAddr(Address(2, 1)),
                Dsn(10, 20, 30), DataFin(99), Timestamp(1, 2), Sack(((5, 9), (20, 40))),
            ),
            payload=b"hello",
        )
        assert decode(encode(s)) == s

    def test_randomized_roundtrip(self):
        rng = random.Random(2024)
        addrs = [Address(h, i) for h in (1, 2) for i in (0, 1)]
        for _ in range(300):
            options = []
            if rng.random() < 0.4:
                options.append(Mpc(rng.getrandbits(32)))
            if rng.random() < 0.4:
                options.append(Join(rng.getrandbits(32)))
            if rng.random() < 0.5:
                length = rng.randint(1, 2000)
                options.append(Dsn(rng.getrandbits(48), rng.getrandbits(32), length))
            if rng.random() < 0.3:
                options.append(AddAddr(rng.choice(addrs)))
            if rng.random() < 0.3:
                options.append(DataFin(rng.getrandbits(48)))
            if rng.random() < 0.7:
                options.append(Timestamp(rng.getrandbits(40), rng.getrandbits(40)))
            if rng.random() < 0.4:
                blocks = []
                for _ in range(rng.randint(1, 4)):
                    left = rng.getrandbits(31)
                    blocks.append((left, left + rng.randint(1, 10_000)))
                options.append(Sack(tuple(blocks)))
            s = seg(
                flags=Flags(rng.randint(0, 15)),
                seq=rng.getrandbits(32),
                ack=rng.getrandbits(32),
                src_port=rng.randint(0, 65535),
                dst_port=rng.randint(0, 65535),
                src_addr=rng.choice(addrs),
                dst_addr=rng.choice(addrs),
                options=tuple(options),
                payload=rng.randbytes(rng.randint(0, 64)),
            )
            assert decode(encode(s)) == s


class TestMalformed:
    def test_three_random_bytes(self):
        with pytest.raises(MalformedSegment):
            decode(b"\x01\x02\x03")

    def test_truncated_header(self):
        data = encode(seg())
        with pytest.raises(MalformedSegment):
            decode(data[: HEADER_LEN - 1])

    def test_truncated_option(self):
        data = encode(seg(options=(Mpc(7),)))
        with pytest.raises(MalformedSegment):
            decode(data[:-2])

    def test_trailing_garbage(self):
        with pytest.raises(MalformedSegment):
            decode(encode(seg()) + b"zz")

    def test_unknown_option_kind(self):
        data = bytearray(encode(seg(options=(Mpc(7),))))
        data[HEADER_LEN] = 200
        with pytest.raises(MalformedSegment):
            decode(bytes(data))

    def test_unknown_flag_bits(self):
        data = bytearray(encode(seg()))
        data[12] = 0xF0 | data[12]
        with pytest.raises(MalformedSegment):
            decode(bytes(data))

    def test_invalid_options_rejected_on_encode(self):
        with pytest.raises(MalformedSegment):
            encode(seg(options=(Dsn(0, 0, 0),)))  # zero-length mapping
        with pytest.raises(MalformedSegment):
            encode(seg(options=(Sack(((9, 5),)),)))  # left >= right
        with pytest.raises(MalformedSegment):
            encode(seg(options=(Sack(()),)))  # empty block list
        with pytest.raises(MalformedSegment):
            encode(seg(options=(Mpc(1), Mpc(2))))  # duplicate kind


class TestSizeAccounting:
    def test_fixed_header_is_forty_bytes(self):
        assert len(encode(seg())) == HEADER_LEN == 40

    def test_size_is_header_plus_options_plus_payload(self):
        s = seg(flags=Flags.ACK, options=(Timestamp(0, 0),), payload=bytes(1400))
        data = encode(s)
        assert len(data) == encoded_size(s) == 40 + (2 + 16) + 1400

    def test_mss_payload_wire_size(self):
        # a bare 1400-byte segment serializes to 1440 bytes on the wire
        s = seg(flags=Flags.ACK, payload=bytes(1400))
        assert len(encode(s)) == 1440


class TestSequenceArithmetic:
    def test_wraparound_compare(self):
        near_top = (1 << 32) - 10
        assert seq_lt(near_top, 5)
        assert not seq_lt(5, near_top)
        assert seq_add(near_top, 20) == 10
        assert seq_rel(5, near_top) == 15
        assert seq_rel(near_top, 5) == -15
