from nanda.index_core.clock import Clock, FixedClock, SystemClock
from nanda.index_core.events import EventKind, EventLog, RegistryEvent, read_log, verify_chain
from nanda.index_core.registry import (
    OwnershipRecord,
    Registry,
    RegistryState,
    ResolutionResult,
    replay,
)

__all__ = [
    "Clock",
    "EventKind",
    "EventLog",
    "FixedClock",
    "OwnershipRecord",
    "Registry",
    "RegistryEvent",
    "RegistryState",
    "ResolutionResult",
    "SystemClock",
    "read_log",
    "replay",
    "verify_chain",
]
