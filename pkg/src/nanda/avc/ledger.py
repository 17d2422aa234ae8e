"""Visibility and control over registered agents.

Task history and control actions ride the registry event log:

  - ``append_task``  -> AUDIT_APPENDED event carrying the chained record
  - ``control``      -> one CONTROL event carrying both the status change and
                        its audit record, so the two can never diverge, even
                        across a crash (single atomic log append)

Billing counts only TASK records with outcome OK; failed and cancelled work
is listed in history but never billed.
"""

from __future__ import annotations

import base64
import binascii
import json
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from nanda.agentfacts.ids import AgentId
from nanda.agentfacts.model import AgentStatus
from nanda.avc.records import (
    GENESIS_HASH,
    AuditOutcome,
    AuditRecord,
    RecordKind,
    chain_records,
    verify_record_chain,
)
from nanda.errors import DomainError
from nanda.index_core.events import EventKind
from nanda.index_core.registry import Registry

ILLEGAL_TRANSITION = "ILLEGAL_TRANSITION"
NOT_AUTHORIZED = "NOT_AUTHORIZED"
BAD_CURSOR = "BAD_CURSOR"


class ControlAction(str, Enum):
    ACTIVATE = "ACTIVATE"
    PAUSE = "PAUSE"
    TERMINATE = "TERMINATE"


_TRANSITIONS: dict[tuple[AgentStatus, ControlAction], AgentStatus] = {
    (AgentStatus.ACTIVE, ControlAction.PAUSE): AgentStatus.PAUSED,
    (AgentStatus.PAUSED, ControlAction.ACTIVATE): AgentStatus.ACTIVE,
    (AgentStatus.ACTIVE, ControlAction.TERMINATE): AgentStatus.TERMINATED,
    (AgentStatus.PAUSED, ControlAction.TERMINATE): AgentStatus.TERMINATED,
}


def legal_transition(current: AgentStatus, action: ControlAction) -> Optional[AgentStatus]:
    """The resulting status, or None when the action is illegal from here."""
    return _TRANSITIONS.get((current, action))


@dataclass(frozen=True)
class BillingLine:
    record_id: str
    task_name: Optional[str]
    started_at: int
    ended_at: int
    duration_seconds: int

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "task_name": self.task_name,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "duration_seconds": self.duration_seconds,
        }


@dataclass(frozen=True)
class BillingSummary:
    task_count: int
    total_duration_seconds: int
    lines: tuple[BillingLine, ...]

    def to_json_dict(self) -> dict:
        return {
            "task_count": self.task_count,
            "total_duration_seconds": self.total_duration_seconds,
            "lines": [line.to_json_dict() for line in self.lines],
        }


@dataclass(frozen=True)
class HistoryPage:
    records: tuple[AuditRecord, ...]
    next_cursor: Optional[str]
    chain_ok: bool
    first_bad_index: Optional[int]

    def to_json_dict(self) -> dict:
        return {
            "records": [r.to_json_dict() for r in self.records],
            "next_cursor": self.next_cursor,
            "chain_ok": self.chain_ok,
            "first_bad_index": self.first_bad_index,
        }


def _encode_cursor(offset: int) -> str:
    return base64.urlsafe_b64encode(json.dumps({"offset": offset}).encode()).decode()


def _decode_cursor(cursor: Optional[str]) -> int:
    if cursor is None:
        return 0
    try:
        body = json.loads(base64.urlsafe_b64decode(cursor.encode()))
        offset = int(body["offset"])
    except (ValueError, KeyError, TypeError, binascii.Error) as exc:
        raise DomainError(BAD_CURSOR, "unreadable page cursor") from exc
    if offset < 0:
        raise DomainError(BAD_CURSOR, "negative page cursor")
    return offset


class AvcLedger:
    """AVC operations bound to one registry instance.

    ``id_source`` exists so seeded fixtures can mint deterministic record
    ids; production uses random UUIDs.
    """

    def __init__(
        self,
        registry: Registry,
        *,
        admin_principals: frozenset[str] = frozenset(),
        id_source: Optional[Callable[[], str]] = None,
    ):
        self.registry = registry
        self.admin_principals = admin_principals
        self._next_id = id_source or (lambda: str(uuid.uuid4()))

    # -- task history ----------------------------------------------------------

    def append_task(
        self,
        agent_id: AgentId,
        *,
        task_name: str,
        started_at: int,
        ended_at: int,
        outcome: AuditOutcome,
        actor: str,
        kind: RecordKind = RecordKind.TASK,
    ) -> AuditRecord:
        def txn() -> AuditRecord:
            self.registry.get(agent_id)  # NOT_FOUND guard; any status may log
            record = chain_records(
                agent_id=agent_id.urn,
                record_id=self._next_id(),
                kind=kind,
                task_name=task_name,
                started_at=started_at,
                ended_at=ended_at,
                outcome=outcome,
                actor=actor,
                prev_hash=self._tip(agent_id),
            )
            self.registry._append(
                EventKind.AUDIT_APPENDED,
                {"agent_id": agent_id.urn, "record": record.to_json_dict()},
                actor,
            )
            return record

        return self.registry.with_write_lock(txn)

    def _tip(self, agent_id: AgentId) -> bytes:
        records = self.registry.audit_records(agent_id)
        if not records:
            return GENESIS_HASH
        return bytes.fromhex(records[-1]["hash"])

    # -- operational control -----------------------------------------------------

    def control(self, agent_id: AgentId, action: ControlAction, actor: str) -> AgentStatus:
        def txn() -> AgentStatus:
            doc = self.registry.get(agent_id)
            ownership = self.registry.ownership(agent_id)
            if not (ownership.may_write(actor) or actor in self.admin_principals):
                raise DomainError(NOT_AUTHORIZED, f"{actor} may not control {agent_id.urn}")
            new_status = legal_transition(doc.status, action)
            if new_status is None:
                raise DomainError(
                    ILLEGAL_TRANSITION, f"{action.value} is illegal from {doc.status.value}"
                )
            at = self.registry.clock.now()
            record = chain_records(
                agent_id=agent_id.urn,
                record_id=self._next_id(),
                kind=RecordKind.CONTROL,
                task_name=action.value,
                started_at=at,
                ended_at=at,
                outcome=AuditOutcome.OK,
                actor=actor,
                prev_hash=self._tip(agent_id),
            )
            self.registry._append(
                EventKind.CONTROL,
                {
                    "agent_id": agent_id.urn,
                    "action": action.value,
                    "new_status": new_status.value,
                    "audit_record": record.to_json_dict(),
                },
                actor,
            )
            return new_status

        return self.registry.with_write_lock(txn)

    # -- reads ---------------------------------------------------------------------

    def full_history(self, agent_id: AgentId) -> list[AuditRecord]:
        return [AuditRecord.from_json_dict(r) for r in self.registry.audit_records(agent_id)]

    def history(
        self,
        agent_id: AgentId,
        *,
        time_from: Optional[int] = None,
        time_to: Optional[int] = None,
        cursor: Optional[str] = None,
        page_size: int = 100,
    ) -> HistoryPage:
        records = self.full_history(agent_id)
        chain_ok, first_bad = verify_record_chain(records)
        selected = [
            r
            for r in records
            if (time_from is None or r.started_at >= time_from)
            and (time_to is None or r.started_at <= time_to)
        ]
        selected.sort(key=lambda r: r.started_at)
        offset = _decode_cursor(cursor)
        page = selected[offset : offset + page_size]
        next_cursor = (
            _encode_cursor(offset + page_size) if offset + page_size < len(selected) else None
        )
        return HistoryPage(
            records=tuple(page),
            next_cursor=next_cursor,
            chain_ok=chain_ok,
            first_bad_index=first_bad,
        )

    def billing_summary(
        self, agent_id: AgentId, *, period_from: int, period_to: int
    ) -> BillingSummary:
        records = self.full_history(agent_id)
        lines = [
            BillingLine(
                record_id=r.record_id,
                task_name=r.task_name,
                started_at=r.started_at,
                ended_at=r.ended_at,
                duration_seconds=r.duration_seconds,
            )
            for r in records
            if r.kind is RecordKind.TASK
            and r.outcome is AuditOutcome.OK
            and r.ended_at >= period_from
            and r.started_at <= period_to
        ]
        lines.sort(key=lambda line: (line.started_at, line.record_id))
        return BillingSummary(
            task_count=len(lines),
            total_duration_seconds=sum(line.duration_seconds for line in lines),
            lines=tuple(lines),
        )
