"""mptcpsim: deterministic discrete-event simulation of multipath TCP.

A two-sublayer transport (connection management above per-path subflows),
four coupled congestion-control algorithms, and two spurious-retransmission
detectors, driven by a microsecond-resolution event engine over configurable
point-to-point links.
"""

from .app import BulkSink, BulkSource, BulkSourceConfig
from .ccontrol import CcAlgorithm, CcKind, ConnectionWindowView
from .config import LinkConfig, ScenarioConfig, parse_config
from .errors import ConfigError, InvariantError
from .mptcp import ConnPhase, DsnMappingRecord, MptcpConnection
from .netmodel import Address, Host, Link
from .reorder import DetectorKind, DsackSlowStartState, ReorderDetector, Snapshot, Verdict
from .scenario import ScenarioResult, build_simulation, run_scenario
from .simcore import Rng, Simulator
from .subflow import Subflow, SubflowConnState
from .trace import EventKind, TraceRecord, Tracer
from .wire import Flags, MalformedSegment, Segment, decode, encode

__version__ = "0.1.0"
