"""Scenario configuration: flat key = value text with [link.N] sections.

An empty file yields the default two-path scenario: two 0.5 Mb/s links with a
constant 10 ms one-way delay and no loss, MSS 1400, a 64 KiB shared receive
window, dupthresh 3, linked_increases with a = 1, seed 1.

Durations accept us/ms/s suffixes (bare integers are microseconds); a delay
schedule is a comma-free-in-value list like ``delay_schedule = 0:10ms;2s:150ms``
or with commas in the config file (``0:10ms,2s:150ms``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

DEFAULT_BANDWIDTH_BPS = 500_000
DEFAULT_DELAY_US = 10_000
DEFAULT_FILE_SIZE = 2_000_000
DEFAULT_SIM_TIME_LIMIT_US = 600_000_000

CC_NAMES = ("uncoupled", "fully_coupled", "linked_increases", "rtt_compensator")
REORDER_NAMES = ("none", "eifel", "dsack")


@dataclass
class LinkConfig:
    bandwidth_bps: int = DEFAULT_BANDWIDTH_BPS
    delay_schedule: list[tuple[int, int]] = field(default_factory=lambda: [(0, DEFAULT_DELAY_US)])
    loss_rate: float = 0.0


@dataclass
class ScenarioConfig:
    links: list[LinkConfig] = field(default_factory=lambda: [LinkConfig(), LinkConfig()])
    cc: str = "linked_increases"
    a: float = 1.0
    rttc_second_term: str = "total"
    reorder: str = "none"
    mss: int = 1400
    rwnd: int = 65536
    dupthresh: int = 3
    file_size: int = DEFAULT_FILE_SIZE
    seed: int = 1
    sim_time_limit: int = DEFAULT_SIM_TIME_LIMIT_US
    trace_out: str = "trace.csv"
    cc_ack_granularity: str = "per_mss"


def _parse_duration(text: str, key: str, line_no: int) -> int:
    text = text.strip()
    scale = 1
    for suffix, s in (("us", 1), ("ms", 1_000), ("s", 1_000_000)):
        if text.endswith(suffix):
            scale = s
            text = text[: -len(suffix)]
            break
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"line {line_no}: key '{key}': bad duration '{text}'") from None
    if value < 0:
        raise ConfigError(f"line {line_no}: key '{key}': duration must be non-negative")
    return int(round(value * scale))


def _parse_delay_schedule(text: str, key: str, line_no: int) -> list[tuple[int, int]]:
    entries = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(f"line {line_no}: key '{key}': entry '{part}' is not time:delay")
        t_text, d_text = part.split(":", 1)
        entries.append(
            (_parse_duration(t_text, key, line_no), _parse_duration(d_text, key, line_no))
        )
    if not entries:
        raise ConfigError(f"line {line_no}: key '{key}': empty delay schedule")
    if entries[0][0] != 0:
        raise ConfigError(f"line {line_no}: key '{key}': first entry must start at 0")
    times = [t for t, _ in entries]
    if times != sorted(times) or len(set(times)) != len(times):
        raise ConfigError(f"line {line_no}: key '{key}': times must be strictly increasing")
    return entries


def _parse_int(text: str, key: str, line_no: int, low: int | None = None, high: int | None = None) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise ConfigError(f"line {line_no}: key '{key}': expected integer, got '{text.strip()}'") from None
    if (low is not None and value < low) or (high is not None and value > high):
        raise ConfigError(f"line {line_no}: key '{key}': value {value} out of range")
    return value


def _parse_float(text: str, key: str, line_no: int, low: float | None = None, high: float | None = None) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise ConfigError(f"line {line_no}: key '{key}': expected number, got '{text.strip()}'") from None
    if (low is not None and value < low) or (high is not None and value > high):
        raise ConfigError(f"line {line_no}: key '{key}': value {value} out of range")
    return value


def _parse_choice(text: str, key: str, line_no: int, choices: tuple[str, ...]) -> str:
    value = text.strip()
    if value not in choices:
        raise ConfigError(
            f"line {line_no}: key '{key}': '{value}' is not one of {'/'.join(choices)}"
        )
    return value


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario; unknown keys and bad values are errors."""
    config = ScenarioConfig()
    link_sections: dict[int, dict[str, tuple[str, int]]] = {}
    top: dict[str, tuple[str, int]] = {}
    section: int | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name.startswith("link."):
                raise ConfigError(f"line {line_no}: unknown section '[{name}]'")
            try:
                index = int(name.split(".", 1)[1])
            except ValueError:
                raise ConfigError(f"line {line_no}: bad link section '[{name}]'") from None
            if index < 0:
                raise ConfigError(f"line {line_no}: link index must be non-negative")
            section = index
            link_sections.setdefault(index, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if section is None:
            top[key] = (value, line_no)
        else:
            link_sections[section][key] = (value, line_no)

    if link_sections:
        indices = sorted(link_sections)
        if indices != list(range(len(indices))):
            missing = next(i for i in range(len(indices)) if i not in link_sections)
            raise ConfigError(f"missing link section [link.{missing}]")
        config.links = [LinkConfig() for _ in indices]
        for index in indices:
            link = config.links[index]
            for key, (value, line_no) in link_sections[index].items():
                if key == "bandwidth_bps":
                    link.bandwidth_bps = _parse_int(value, key, line_no, low=1)
                elif key == "delay_schedule":
                    link.delay_schedule = _parse_delay_schedule(value, key, line_no)
                elif key == "loss_rate":
                    link.loss_rate = _parse_float(value, key, line_no, low=0.0, high=1.0)
                else:
                    raise ConfigError(f"line {line_no}: unknown link key '{key}'")

    for key, (value, line_no) in top.items():
        if key == "cc":
            config.cc = _parse_choice(value, key, line_no, CC_NAMES)
        elif key == "a":
            config.a = _parse_float(value, key, line_no, low=1e-9)
        elif key == "rttc_second_term":
            config.rttc_second_term = _parse_choice(value, key, line_no, ("total", "per_path"))
        elif key == "reorder":
            config.reorder = _parse_choice(value, key, line_no, REORDER_NAMES)
        elif key == "mss":
            config.mss = _parse_int(value, key, line_no, low=64, high=65000)
        elif key == "rwnd":
            config.rwnd = _parse_int(value, key, line_no, low=64)
        elif key == "dupthresh":
            config.dupthresh = _parse_int(value, key, line_no, low=1)
        elif key == "file_size":
            config.file_size = _parse_int(value, key, line_no, low=1)
        elif key == "seed":
            config.seed = _parse_int(value, key, line_no, low=0)
        elif key == "sim_time_limit":
            config.sim_time_limit = _parse_duration(value, key, line_no)
        elif key == "trace_out":
            config.trace_out = value
        elif key == "cc_ack_granularity":
            config.cc_ack_granularity = _parse_choice(value, key, line_no, ("per_mss", "per_ack"))
        else:
            raise ConfigError(f"line {line_no}: unknown key '{key}'")

    return config


def apply_overrides(config: ScenarioConfig, overrides: dict[str, str]) -> ScenarioConfig:
    """Apply CLI flag values (strings) on top of a parsed config."""
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "cc":
            config.cc = _parse_choice(value, key, 0, CC_NAMES)
        elif key == "a":
            config.a = _parse_float(value, key, 0, low=1e-9)
        elif key == "rttc_second_term":
            config.rttc_second_term = _parse_choice(value, key, 0, ("total", "per_path"))
        elif key == "reorder":
            config.reorder = _parse_choice(value, key, 0, REORDER_NAMES)
        elif key == "mss":
            config.mss = _parse_int(value, key, 0, low=64, high=65000)
        elif key == "rwnd":
            config.rwnd = _parse_int(value, key, 0, low=64)
        elif key == "dupthresh":
            config.dupthresh = _parse_int(value, key, 0, low=1)
        elif key == "file_size":
            config.file_size = _parse_int(value, key, 0, low=1)
        elif key == "seed":
            config.seed = _parse_int(value, key, 0, low=0)
        elif key == "sim_time_limit":
            config.sim_time_limit = _parse_duration(value, key, 0)
        elif key == "trace_out":
            config.trace_out = value
        elif key == "cc_ack_granularity":
            config.cc_ack_granularity = _parse_choice(value, key, 0, ("per_mss", "per_ack"))
        else:
            raise ConfigError(f"unknown override '{key}'")
    return config
