"""Per-agent tamper-evident audit records.

Each agent has its own hash chain (genesis prev_hash = 32 zero bytes);
``hash = sha256(canonical(record minus hash) || prev_hash)``. Keeping chains
per agent means verifying one agent's history costs only that history.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from nanda.agentfacts.canonical import canonicalize
from nanda.errors import DomainError

GENESIS_HASH = bytes(32)

TIME_INVERSION = "TIME_INVERSION"


class RecordKind(str, Enum):
    TASK = "TASK"
    CONTROL = "CONTROL"
    POLICY_LOG = "POLICY_LOG"


class AuditOutcome(str, Enum):
    OK = "OK"
    FAILED = "FAILED"
    CANCELLED = "CANCELLED"


@dataclass(frozen=True)
class AuditRecord:
    agent_id: str
    record_id: str
    kind: RecordKind
    task_name: Optional[str]
    started_at: int
    ended_at: int
    outcome: AuditOutcome
    actor: str
    prev_hash: bytes
    hash: bytes

    @property
    def duration_seconds(self) -> int:
        return self.ended_at - self.started_at

    def hashed_body(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "record_id": self.record_id,
            "kind": self.kind.value,
            "task_name": self.task_name,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "outcome": self.outcome.value,
            "actor": self.actor,
            "prev_hash": self.prev_hash.hex(),
        }

    def to_json_dict(self) -> dict:
        body = self.hashed_body()
        body["hash"] = self.hash.hex()
        return body

    @classmethod
    def from_json_dict(cls, body: dict) -> "AuditRecord":
        try:
            return cls(
                agent_id=str(body["agent_id"]),
                record_id=str(body["record_id"]),
                kind=RecordKind(body["kind"]),
                task_name=None if body["task_name"] is None else str(body["task_name"]),
                started_at=int(body["started_at"]),
                ended_at=int(body["ended_at"]),
                outcome=AuditOutcome(body["outcome"]),
                actor=str(body["actor"]),
                prev_hash=bytes.fromhex(body["prev_hash"]),
                hash=bytes.fromhex(body["hash"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError("INVALID_RECORD", f"unreadable audit record: {exc}") from exc


def record_hash(body: dict, prev_hash: bytes) -> bytes:
    return hashlib.sha256(canonicalize(body) + prev_hash).digest()


def chain_records(
    *,
    agent_id: str,
    record_id: str,
    kind: RecordKind,
    task_name: Optional[str],
    started_at: int,
    ended_at: int,
    outcome: AuditOutcome,
    actor: str,
    prev_hash: bytes,
) -> AuditRecord:
    if ended_at < started_at:
        raise DomainError(TIME_INVERSION, "ended_at is before started_at")
    unsigned = AuditRecord(
        agent_id=agent_id, record_id=record_id, kind=kind, task_name=task_name,
        started_at=started_at, ended_at=ended_at, outcome=outcome, actor=actor,
        prev_hash=prev_hash, hash=b"",
    )
    return AuditRecord(
        agent_id=agent_id, record_id=record_id, kind=kind, task_name=task_name,
        started_at=started_at, ended_at=ended_at, outcome=outcome, actor=actor,
        prev_hash=prev_hash, hash=record_hash(unsigned.hashed_body(), prev_hash),
    )


def verify_record_chain(records: list[AuditRecord]) -> tuple[bool, Optional[int]]:
    """(ok, first_bad_index) over one agent's full history, oldest first."""
    prev_hash = GENESIS_HASH
    for i, record in enumerate(records):
        if record.prev_hash != prev_hash:
            return False, i
        if record.hash != record_hash(record.hashed_body(), record.prev_hash):
            return False, i
        prev_hash = record.hash
    return True, None
