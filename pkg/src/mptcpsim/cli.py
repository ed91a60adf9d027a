"""Command-line scenario runner.

Exit codes: 0 on a completed transfer with all invariants held, 1 on a
configuration error, 2 on a runtime invariant breach or an incomplete
transfer.
"""

from __future__ import annotations

import argparse
import sys

from .config import ScenarioConfig, apply_overrides, parse_config
from .errors import ConfigError, InvariantError
from .scenario import run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mptcpsim",
        description="Deterministic multipath-TCP transfer simulation over two point-to-point paths.",
    )
    parser.add_argument("--config", help="scenario file (key = value with [link.N] sections)")
    parser.add_argument("--cc", help="congestion control: uncoupled|fully_coupled|linked_increases|rtt_compensator")
    parser.add_argument("--a", help="coupled-increase aggressiveness (default 1)")
    parser.add_argument("--rttc-second-term", dest="rttc_second_term", help="total|per_path")
    parser.add_argument("--reorder", help="spurious-retransmission detector: none|eifel|dsack")
    parser.add_argument("--mss", help="segment payload size in bytes")
    parser.add_argument("--rwnd", help="shared receive window in bytes")
    parser.add_argument("--dupthresh", help="duplicate ACKs before fast retransmit")
    parser.add_argument("--file-size", dest="file_size", help="transfer size in bytes")
    parser.add_argument("--seed", help="PRNG seed")
    parser.add_argument("--sim-time-limit", dest="sim_time_limit", help="simulated time budget (e.g. 600s)")
    parser.add_argument("--trace-out", dest="trace_out", help="trace CSV output path")
    parser.add_argument(
        "--cc-ack-granularity", dest="cc_ack_granularity", help="per_mss|per_ack window accounting"
    )
    return parser


OVERRIDE_KEYS = (
    "cc",
    "a",
    "rttc_second_term",
    "reorder",
    "mss",
    "rwnd",
    "dupthresh",
    "file_size",
    "seed",
    "sim_time_limit",
    "trace_out",
    "cc_ack_granularity",
)


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        config = parse_config(text)
    else:
        config = ScenarioConfig()
    overrides = {key: getattr(args, key) for key in OVERRIDE_KEYS}
    return apply_overrides(config, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        result = run_scenario(config)
    except InvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 2
    result.tracer.write(config.trace_out)
    print(result.summary_line())
    if not result.completed:
        print("transfer did not complete within sim_time_limit", file=sys.stderr)
        return 2
    if not result.checksum_ok:
        print("invariant breach: sink checksum differs from source", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
