"""Crash-injection harness for the event log.

A kill during an append leaves the log as some byte prefix of its final
content (append-only file, one write per event). The harness therefore
builds a mixed write workload, then "crashes" it at arbitrary byte offsets by
truncating a copy, restarting a registry on the wreckage, and checking:

  - the recovered state equals replaying some *prefix* of the logical event
    history (never a mix, never an invention),
  - CONTROL events and their audit records stay paired,
  - no replayed history contains an illegal status transition.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from random import Random

from nanda.agentfacts.canonical import canonicalize
from nanda.agentfacts.ids import AgentId, did_for_public_key
from nanda.agentfacts.model import (
    AgentFactsDoc,
    AgentStatus,
    EndpointDescriptor,
    EndpointProtocol,
)
from nanda.avc.ledger import AvcLedger, ControlAction, legal_transition
from nanda.avc.records import AuditOutcome
from nanda.credentials.keys import keypair_from_seed
from nanda.errors import DomainError
from nanda.index_core.clock import FixedClock
from nanda.index_core.events import EventKind, RegistryEvent
from nanda.index_core.registry import Registry, replay


def make_workload_doc(i: int) -> AgentFactsDoc:
    key = keypair_from_seed(i.to_bytes(4, "big") * 8)
    agent_id = AgentId(zone="load", name=f"w-{i:03d}")
    return AgentFactsDoc(
        agent_id=agent_id,
        did=did_for_public_key(key.public_bytes),
        owner=f"owner-{i % 4}",
        endpoints=(
            EndpointDescriptor(
                protocol=EndpointProtocol.HTTPS,
                url=f"https://{agent_id.name}.load.example/",
                priority=0,
            ),
        ),
        capabilities=("retail.inventory",),
        content_flags=(),
        regions=(),
        claims=(),
        registered_at=0,
        status=AgentStatus.ACTIVE,
        version=1,
    )


def build_workload(path: Path, *, seed: int, agents: int = 12, ops: int = 250) -> list:
    """Drive a mixed register/update/control/task/delete workload; returns
    the full logical event history."""
    rng = Random(seed)
    clock = FixedClock(1_750_000_000)
    registry = Registry(path, clock=clock)
    ledger = AvcLedger(registry, admin_principals=frozenset({"ops-admin"}))

    ids: list[AgentId] = []
    for i in range(agents):
        doc = make_workload_doc(i)
        registry.register(doc, doc.owner)
        ids.append(doc.agent_id)
        clock.advance(rng.randrange(1, 50))

    for _ in range(ops):
        aid = rng.choice(ids)
        doc = registry.get(aid)
        op = rng.random()
        try:
            if op < 0.30:
                registry.update(
                    aid,
                    doc.with_(
                        version=doc.version + 1,
                        content_flags=tuple(sorted({*doc.content_flags, "user_generated"})),
                    ),
                    doc.owner,
                )
            elif op < 0.55:
                action = rng.choice(list(ControlAction))
                ledger.control(aid, action, "ops-admin")
            elif op < 0.9:
                start = clock.now()
                ledger.append_task(
                    aid,
                    task_name=f"task-{rng.randrange(1000)}",
                    started_at=start,
                    ended_at=start + rng.randrange(0, 400),
                    outcome=rng.choice(list(AuditOutcome)),
                    actor=doc.owner,
                )
            else:
                registry.delete(aid, doc.owner)
        except DomainError:
            pass  # illegal transitions / terminated writes are expected noise
        clock.advance(rng.randrange(1, 30))

    return registry.events()


@dataclass
class RecoveryReport:
    recovered_events: int
    torn_tail_dropped: bool


def crash_and_recover(original: Path, wreck: Path, cut_at: int) -> tuple[RecoveryReport, Registry]:
    """Truncate a copy of the log at byte *cut_at* and restart on it."""
    data = original.read_bytes()
    wreck.write_bytes(data[:cut_at])
    registry = Registry(wreck, clock=FixedClock())
    report = RecoveryReport(
        recovered_events=len(registry.events()),
        torn_tail_dropped=registry.torn_tail_recovered,
    )
    return report, registry


def assert_prefix_state(registry: Registry, full_history: list) -> None:
    """Recovered state must equal a replay of the same-length history prefix."""
    recovered = registry.events()
    n = len(recovered)
    prefix = full_history[:n]
    for got, want in zip(recovered, prefix):
        if got.hash != want.hash:
            raise AssertionError(f"recovered event {got.seq} diverges from history")
    if canonicalize(registry.state_dump()) != canonicalize(replay(prefix).dump()):
        raise AssertionError("recovered state is not the prefix replay state")


def assert_control_audit_atomicity(events: list[RegistryEvent]) -> None:
    for event in events:
        if event.kind is EventKind.CONTROL:
            record = event.payload.get("audit_record")
            if not record or record.get("kind") != "CONTROL":
                raise AssertionError(f"CONTROL event {event.seq} lacks its audit record")


def assert_legal_status_history(events: list[RegistryEvent]) -> None:
    status: dict[str, AgentStatus] = {}
    for event in events:
        if event.kind is EventKind.REGISTERED:
            urn = event.payload["doc"]["agent_id"]
            status[urn] = AgentStatus.ACTIVE
        elif event.kind is EventKind.CONTROL:
            urn = event.payload["agent_id"]
            action = ControlAction(event.payload["action"])
            new = legal_transition(status[urn], action)
            if new is None or new.value != event.payload["new_status"]:
                raise AssertionError(
                    f"illegal transition at seq {event.seq}: "
                    f"{status[urn].value} + {action.value}"
                )
            status[urn] = new
        elif event.kind is EventKind.DELETED:
            urn = event.payload["agent_id"]
            if status[urn] is AgentStatus.TERMINATED:
                raise AssertionError(f"delete of terminated agent at seq {event.seq}")
            status[urn] = AgentStatus.TERMINATED
