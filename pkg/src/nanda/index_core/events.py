"""The hash-chained registry event log.

One canonical JSON object per line; each event's hash covers its own fields
plus the previous hash, so any in-place edit, reorder, or deletion breaks the
chain. Only the final line may legitimately be damaged (a crash mid-append),
and recovery may drop exactly that torn tail.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from nanda.agentfacts.canonical import canonicalize, from_canonical_json
from nanda.errors import DomainError

CHAIN_BROKEN = "CHAIN_BROKEN"
GAP_IN_SEQ = "GAP_IN_SEQ"

GENESIS_HASH = bytes(32)


class EventKind(str, Enum):
    REGISTERED = "REGISTERED"
    UPDATED = "UPDATED"
    DELETED = "DELETED"
    CONTROL = "CONTROL"
    AUDIT_APPENDED = "AUDIT_APPENDED"


@dataclass(frozen=True)
class RegistryEvent:
    seq: int
    kind: EventKind
    payload: dict
    actor: str
    at: int
    prev_hash: bytes
    hash: bytes

    def hashed_body(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind.value,
            "payload": self.payload,
            "actor": self.actor,
            "at": self.at,
            "prev_hash": self.prev_hash.hex(),
        }

    def to_json_dict(self) -> dict:
        body = self.hashed_body()
        body["hash"] = self.hash.hex()
        return body

    @classmethod
    def from_json_dict(cls, body: dict) -> "RegistryEvent":
        try:
            return cls(
                seq=int(body["seq"]),
                kind=EventKind(body["kind"]),
                payload=dict(body["payload"]),
                actor=str(body["actor"]),
                at=int(body["at"]),
                prev_hash=bytes.fromhex(body["prev_hash"]),
                hash=bytes.fromhex(body["hash"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(CHAIN_BROKEN, f"unreadable event: {exc}") from exc


def event_hash(body: dict, prev_hash: bytes) -> bytes:
    return hashlib.sha256(canonicalize(body) + prev_hash).digest()


def build_event(
    seq: int, kind: EventKind, payload: dict, actor: str, at: int, prev_hash: bytes
) -> RegistryEvent:
    unsigned = RegistryEvent(
        seq=seq, kind=kind, payload=payload, actor=actor, at=at,
        prev_hash=prev_hash, hash=b"",
    )
    return RegistryEvent(
        seq=seq, kind=kind, payload=payload, actor=actor, at=at,
        prev_hash=prev_hash, hash=event_hash(unsigned.hashed_body(), prev_hash),
    )


def verify_chain(events: Iterable[RegistryEvent]) -> None:
    """Raise CHAIN_BROKEN / GAP_IN_SEQ on the first inconsistent event."""
    prev_hash = GENESIS_HASH
    expected_seq = 1
    for event in events:
        if event.seq != expected_seq:
            raise DomainError(
                GAP_IN_SEQ,
                f"expected seq {expected_seq}, found {event.seq}",
                details={"seq": event.seq},
            )
        if event.prev_hash != prev_hash or event.hash != event_hash(
            event.hashed_body(), event.prev_hash
        ):
            raise DomainError(
                CHAIN_BROKEN, f"hash chain breaks at seq {event.seq}",
                details={"seq": event.seq},
            )
        prev_hash = event.hash
        expected_seq += 1


class EventLog:
    """Appender over ``registry.events.jsonl`` (or purely in memory)."""

    def __init__(self, path: Optional[Path] = None, *, sync: bool = False):
        self.path = Path(path) if path is not None else None
        self.sync = sync
        self._events: list[RegistryEvent] = []
        self._tail_hash = GENESIS_HASH

    @property
    def events(self) -> list[RegistryEvent]:
        return list(self._events)

    @property
    def next_seq(self) -> int:
        return len(self._events) + 1

    def restore(self, events: list[RegistryEvent]) -> None:
        """Adopt an already-verified event list as the log's history."""
        self._events = list(events)
        self._tail_hash = events[-1].hash if events else GENESIS_HASH

    def append(self, kind: EventKind, payload: dict, actor: str, at: int) -> RegistryEvent:
        event = build_event(self.next_seq, kind, payload, actor, at, self._tail_hash)
        if self.path is not None:
            line = canonicalize(event.to_json_dict()) + b"\n"
            with open(self.path, "ab") as fh:
                fh.write(line)
                fh.flush()
                if self.sync:
                    os.fsync(fh.fileno())
        self._events.append(event)
        self._tail_hash = event.hash
        return event


def read_log(path: Path, *, recover_torn_tail: bool = True) -> tuple[list[RegistryEvent], bool]:
    """Parse a log file into events.

    Returns (events, tail_dropped). A final line that does not parse is a
    torn append and is dropped when *recover_torn_tail* is set; damage
    anywhere else is tampering and raises CHAIN_BROKEN.
    """
    events: list[RegistryEvent] = []
    raw_lines = Path(path).read_bytes().split(b"\n")
    if raw_lines and raw_lines[-1] == b"":
        raw_lines.pop()
    tail_dropped = False
    for i, line in enumerate(raw_lines):
        try:
            body = from_canonical_json(line)
            event = RegistryEvent.from_json_dict(body)
        except (DomainError, ValueError) as exc:
            if i == len(raw_lines) - 1 and recover_torn_tail:
                tail_dropped = True
                break
            raise DomainError(
                CHAIN_BROKEN, f"unparseable event at line {i + 1}",
                details={"seq": i + 1},
            ) from exc
        events.append(event)
    return events, tail_dropped
