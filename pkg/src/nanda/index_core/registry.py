"""Ownership-controlled CRUD over AgentFacts, backed by the event log.

All writes serialize on one lock and go through the same two steps: append
the event, then apply it to in-memory state with the same applier that replay
uses, so a cold-start replay always reconstructs exactly the state the live
process had. Reads take the lock only long enough to copy references.

The registry clock stamps ``registered_at`` and event times; client-supplied
versions give optimistic concurrency (exactly one of two racing updates for
the same next version wins).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from nanda.agentfacts.ids import AgentId
from nanda.agentfacts.model import AgentFactsDoc, AgentStatus, validate_doc
from nanda.errors import DomainError
from nanda.index_core.clock import Clock, SystemClock
from nanda.index_core.events import (
    EventKind,
    EventLog,
    RegistryEvent,
    read_log,
    verify_chain,
)

ALREADY_EXISTS = "ALREADY_EXISTS"
INVALID_DOC = "INVALID_DOC"
NOT_FOUND = "NOT_FOUND"
NOT_OWNER = "NOT_OWNER"
VERSION_CONFLICT = "VERSION_CONFLICT"
TERMINATED_IMMUTABLE = "TERMINATED_IMMUTABLE"


@dataclass(frozen=True)
class OwnershipRecord:
    agent_id: AgentId
    owner: str
    delegates: frozenset[str] = frozenset()

    def may_write(self, actor: str) -> bool:
        return actor == self.owner or actor in self.delegates

    def to_json_dict(self) -> dict:
        return {
            "agent_id": self.agent_id.urn,
            "owner": self.owner,
            "delegates": sorted(self.delegates),
        }


@dataclass(frozen=True)
class ResolutionResult:
    agent_id: AgentId
    did: str
    endpoints: tuple
    status: AgentStatus

    def to_json_dict(self) -> dict:
        return {
            "agent_id": self.agent_id.urn,
            "did": self.did,
            "endpoints": [e.to_json_dict() for e in self.endpoints],
            "status": self.status.value,
        }


@dataclass
class RegistryState:
    """Pure state derived from the event log; audit records stay as the raw
    canonical dicts carried by their events (the avc package owns their
    semantics)."""

    docs: dict[str, AgentFactsDoc] = field(default_factory=dict)
    ownership: dict[str, OwnershipRecord] = field(default_factory=dict)
    audit: dict[str, list[dict]] = field(default_factory=dict)

    def apply(self, event: RegistryEvent) -> None:
        payload = event.payload
        if event.kind is EventKind.REGISTERED:
            doc = AgentFactsDoc.from_json_dict(payload["doc"])
            urn = doc.agent_id.urn
            self.docs[urn] = doc
            self.ownership[urn] = OwnershipRecord(agent_id=doc.agent_id, owner=doc.owner)
            self.audit.setdefault(urn, [])
        elif event.kind is EventKind.UPDATED:
            if "doc" in payload:
                doc = AgentFactsDoc.from_json_dict(payload["doc"])
                urn = doc.agent_id.urn
                self.docs[urn] = doc
                current = self.ownership[urn]
                self.ownership[urn] = OwnershipRecord(
                    agent_id=doc.agent_id,
                    owner=doc.owner,
                    delegates=current.delegates - {doc.owner},
                )
            else:
                urn = payload["agent_id"]
                current = self.ownership[urn]
                self.ownership[urn] = OwnershipRecord(
                    agent_id=current.agent_id,
                    owner=current.owner,
                    delegates=frozenset(payload["delegates"]) - {current.owner},
                )
        elif event.kind is EventKind.DELETED:
            urn = payload["agent_id"]
            self.docs[urn] = self.docs[urn].with_(status=AgentStatus.TERMINATED)
        elif event.kind is EventKind.CONTROL:
            urn = payload["agent_id"]
            self.docs[urn] = self.docs[urn].with_(status=AgentStatus(payload["new_status"]))
            self.audit.setdefault(urn, []).append(payload["audit_record"])
        elif event.kind is EventKind.AUDIT_APPENDED:
            urn = payload["agent_id"]
            self.audit.setdefault(urn, []).append(payload["record"])

    def dump(self) -> dict:
        """Deterministic, canonicalizable snapshot of the whole state."""
        return {
            "agents": {urn: doc.to_json_dict() for urn, doc in sorted(self.docs.items())},
            "ownership": {urn: o.to_json_dict() for urn, o in sorted(self.ownership.items())},
            "audit": {urn: list(records) for urn, records in sorted(self.audit.items())},
        }


def replay(events: list[RegistryEvent]) -> RegistryState:
    """Rebuild state from a verified-chain event list."""
    verify_chain(events)
    state = RegistryState()
    for event in events:
        state.apply(event)
    return state


class Registry:
    """The live index: event log + derived state + write serialization."""

    def __init__(
        self,
        log_path: Optional[Path] = None,
        *,
        clock: Optional[Clock] = None,
        sync: bool = False,
        recover_torn_tail: bool = True,
    ):
        self.clock = clock or SystemClock()
        self._lock = threading.RLock()
        self._log = EventLog(log_path, sync=sync)
        self._state = RegistryState()
        self.torn_tail_recovered = False
        if log_path is not None and Path(log_path).exists():
            events, dropped = read_log(Path(log_path), recover_torn_tail=recover_torn_tail)
            self._state = replay(events)
            self._log.restore(events)
            self.torn_tail_recovered = dropped
            if dropped:
                # Rewrite the file to the verified prefix so later appends
                # chain onto a clean tail.
                self._rewrite_log(events)

    def _rewrite_log(self, events: list[RegistryEvent]) -> None:
        assert self._log.path is not None
        from nanda.agentfacts.canonical import canonicalize

        tmp = self._log.path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            for event in events:
                fh.write(canonicalize(event.to_json_dict()) + b"\n")
        tmp.replace(self._log.path)

    # -- internal write path --------------------------------------------------

    def _append(self, kind: EventKind, payload: dict, actor: str) -> RegistryEvent:
        event = self._log.append(kind, payload, actor, self.clock.now())
        self._state.apply(event)
        return event

    def with_write_lock(self, fn: Callable):
        with self._lock:
            return fn()

    # -- reads -----------------------------------------------------------------

    def get(self, agent_id: AgentId) -> AgentFactsDoc:
        with self._lock:
            doc = self._state.docs.get(agent_id.urn)
        if doc is None:
            raise DomainError(NOT_FOUND, f"no agent {agent_id.urn}")
        return doc

    def ownership(self, agent_id: AgentId) -> OwnershipRecord:
        with self._lock:
            record = self._state.ownership.get(agent_id.urn)
        if record is None:
            raise DomainError(NOT_FOUND, f"no agent {agent_id.urn}")
        return record

    def list_docs(self) -> list[AgentFactsDoc]:
        with self._lock:
            return [self._state.docs[urn] for urn in sorted(self._state.docs)]

    def audit_records(self, agent_id: AgentId) -> list[dict]:
        with self._lock:
            if agent_id.urn not in self._state.docs:
                raise DomainError(NOT_FOUND, f"no agent {agent_id.urn}")
            return list(self._state.audit.get(agent_id.urn, []))

    def events(self) -> list[RegistryEvent]:
        with self._lock:
            return self._log.events

    def state_dump(self) -> dict:
        with self._lock:
            return self._state.dump()

    def resolve(self, agent_id: AgentId) -> ResolutionResult:
        doc = self.get(agent_id)
        if doc.status is AgentStatus.TERMINATED:
            raise DomainError(NOT_FOUND, f"agent {agent_id.urn} is terminated")
        ordered = tuple(sorted(doc.endpoints, key=lambda e: e.priority))
        return ResolutionResult(
            agent_id=doc.agent_id, did=str(doc.did), endpoints=ordered, status=doc.status
        )

    # -- writes ----------------------------------------------------------------

    def register(self, doc: AgentFactsDoc, actor: str) -> AgentId:
        with self._lock:
            normalized = doc.with_(
                version=1,
                status=AgentStatus.ACTIVE,
                registered_at=self.clock.now(),
            )
            report = validate_doc(normalized)
            if report:
                raise DomainError(
                    INVALID_DOC,
                    "document violates invariants",
                    details=[v.to_json_dict() for v in report],
                )
            if normalized.agent_id.urn in self._state.docs:
                raise DomainError(ALREADY_EXISTS, f"{normalized.agent_id.urn} is registered")
            self._append(
                EventKind.REGISTERED, {"doc": normalized.to_json_dict()}, actor
            )
            return normalized.agent_id

    def update(self, agent_id: AgentId, new_doc: AgentFactsDoc, actor: str) -> int:
        with self._lock:
            current = self._state.docs.get(agent_id.urn)
            if current is None:
                raise DomainError(NOT_FOUND, f"no agent {agent_id.urn}")
            if current.status is AgentStatus.TERMINATED:
                raise DomainError(TERMINATED_IMMUTABLE, "terminated agents cannot change")
            record = self._state.ownership[agent_id.urn]
            if not record.may_write(actor):
                raise DomainError(NOT_OWNER, f"{actor} is neither owner nor delegate")
            if new_doc.agent_id != agent_id:
                raise DomainError(INVALID_DOC, "document agent_id does not match the target")
            # status and registered_at are registry-owned: control() changes
            # status, the clock set registered_at once at registration.
            normalized = new_doc.with_(
                status=current.status, registered_at=current.registered_at
            )
            report = validate_doc(normalized)
            if report:
                raise DomainError(
                    INVALID_DOC,
                    "document violates invariants",
                    details=[v.to_json_dict() for v in report],
                )
            if normalized.version != current.version + 1:
                raise DomainError(
                    VERSION_CONFLICT,
                    f"expected version {current.version + 1}, got {normalized.version}",
                )
            self._append(EventKind.UPDATED, {"doc": normalized.to_json_dict()}, actor)
            return normalized.version

    def delete(self, agent_id: AgentId, actor: str) -> None:
        with self._lock:
            current = self._state.docs.get(agent_id.urn)
            if current is None:
                raise DomainError(NOT_FOUND, f"no agent {agent_id.urn}")
            record = self._state.ownership[agent_id.urn]
            if actor != record.owner:
                raise DomainError(NOT_OWNER, f"{actor} does not own {agent_id.urn}")
            if current.status is AgentStatus.TERMINATED:
                raise DomainError(TERMINATED_IMMUTABLE, "already terminated")
            self._append(EventKind.DELETED, {"agent_id": agent_id.urn}, actor)

    def set_delegates(self, agent_id: AgentId, delegates: set[str], actor: str) -> None:
        with self._lock:
            record = self._state.ownership.get(agent_id.urn)
            if record is None:
                raise DomainError(NOT_FOUND, f"no agent {agent_id.urn}")
            if actor != record.owner:
                raise DomainError(NOT_OWNER, "only the owner manages delegates")
            self._append(
                EventKind.UPDATED,
                {"agent_id": agent_id.urn, "delegates": sorted(set(delegates) - {record.owner})},
                actor,
            )

    # -- snapshots ---------------------------------------------------------------

    def write_snapshot(self, path: Path) -> None:
        """Write a consistent ``registry.snapshot.json`` (state + log position)."""
        from nanda.agentfacts.canonical import canonicalize

        with self._lock:
            events = self._log.events
            body = {
                "state": self._state.dump(),
                "last_seq": events[-1].seq if events else 0,
                "last_hash": events[-1].hash.hex() if events else "00" * 32,
            }
        tmp = Path(path).with_suffix(".tmp")
        tmp.write_bytes(canonicalize(body) + b"\n")
        tmp.replace(path)
