from __future__ import annotations

import random

import pytest

from nanda.agentfacts.model import AgentStatus
from nanda.avc.ledger import AvcLedger, ControlAction, legal_transition
from nanda.avc.records import (
    GENESIS_HASH,
    AuditOutcome,
    AuditRecord,
    RecordKind,
    verify_record_chain,
)
from nanda.errors import DomainError
from nanda.index_core.clock import FixedClock
from nanda.index_core.events import EventKind
from nanda.index_core.registry import Registry

from conftest import make_doc

NOW = 1_700_000_000


@pytest.fixture
def ledger():
    registry = Registry(clock=FixedClock(NOW))
    return AvcLedger(registry, admin_principals=frozenset({"root-admin"}))


def add_task(ledger, aid, *, start, duration=60, outcome=AuditOutcome.OK, name="job"):
    return ledger.append_task(
        aid,
        task_name=name,
        started_at=start,
        ended_at=start + duration,
        outcome=outcome,
        actor="alice",
    )


class TestAppendTask:
    def test_first_record_has_genesis_prev_hash(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        record = add_task(ledger, aid, start=NOW)
        assert record.prev_hash == GENESIS_HASH

    def test_time_inversion_rejected(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        with pytest.raises(DomainError) as err:
            ledger.append_task(
                aid, task_name="t", started_at=NOW, ended_at=NOW - 1,
                outcome=AuditOutcome.OK, actor="alice",
            )
        assert err.value.code == "TIME_INVERSION"

    def test_unknown_agent(self, ledger):
        from nanda.agentfacts.ids import parse_agent_id

        with pytest.raises(DomainError) as err:
            add_task(ledger, parse_agent_id("agent://no/body"), start=NOW)
        assert err.value.code == "NOT_FOUND"

    def test_paused_agent_may_still_log(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        ledger.control(aid, ControlAction.PAUSE, "alice")
        record = add_task(ledger, aid, start=NOW)
        assert record.kind is RecordKind.TASK

    def test_chain_links_and_verifies(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        for i in range(20):
            add_task(ledger, aid, start=NOW + i)
        records = ledger.full_history(aid)
        ok, bad = verify_record_chain(records)
        assert ok and bad is None
        for prev, cur in zip(records, records[1:]):
            assert cur.prev_hash == prev.hash

    def test_single_field_tamper_detected_at_index(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        for i in range(100):
            add_task(ledger, aid, start=NOW + i)
        records = ledger.full_history(aid)
        tampered = list(records)
        victim = tampered[40]
        tampered[40] = AuditRecord.from_json_dict(
            {**victim.to_json_dict(), "task_name": "jpb"}
        )
        ok, bad = verify_record_chain(tampered)
        assert not ok and bad == 40


class TestControl:
    def test_pause_and_reactivate(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        assert ledger.control(aid, ControlAction.PAUSE, "alice") is AgentStatus.PAUSED
        assert ledger.control(aid, ControlAction.ACTIVATE, "alice") is AgentStatus.ACTIVE

    def test_terminated_is_absorbing(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        ledger.control(aid, ControlAction.TERMINATE, "alice")
        with pytest.raises(DomainError) as err:
            ledger.control(aid, ControlAction.ACTIVATE, "alice")
        assert err.value.code == "ILLEGAL_TRANSITION"

    def test_pause_when_paused_is_illegal(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        ledger.control(aid, ControlAction.PAUSE, "alice")
        with pytest.raises(DomainError):
            ledger.control(aid, ControlAction.PAUSE, "alice")

    def test_admin_may_control_foreign_agent(self, ledger):
        aid = ledger.registry.register(make_doc(owner="alice"), "alice")
        assert ledger.control(aid, ControlAction.PAUSE, "root-admin") is AgentStatus.PAUSED

    def test_stranger_may_not(self, ledger):
        aid = ledger.registry.register(make_doc(owner="alice"), "alice")
        with pytest.raises(DomainError) as err:
            ledger.control(aid, ControlAction.PAUSE, "mallory")
        assert err.value.code == "NOT_AUTHORIZED"

    def test_control_event_and_audit_record_are_one_append(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        before = len(ledger.registry.events())
        ledger.control(aid, ControlAction.PAUSE, "alice")
        events = ledger.registry.events()
        assert len(events) == before + 1
        assert events[-1].kind is EventKind.CONTROL
        assert events[-1].payload["audit_record"]["kind"] == "CONTROL"
        history = ledger.full_history(aid)
        assert history[-1].kind is RecordKind.CONTROL

    def test_legal_transition_table(self):
        assert legal_transition(AgentStatus.ACTIVE, ControlAction.PAUSE) is AgentStatus.PAUSED
        assert legal_transition(AgentStatus.PAUSED, ControlAction.ACTIVATE) is AgentStatus.ACTIVE
        assert legal_transition(AgentStatus.ACTIVE, ControlAction.ACTIVATE) is None
        assert legal_transition(AgentStatus.TERMINATED, ControlAction.PAUSE) is None
        assert (
            legal_transition(AgentStatus.PAUSED, ControlAction.TERMINATE)
            is AgentStatus.TERMINATED
        )


class TestHistory:
    def test_empty_history_has_true_flag(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        page = ledger.history(aid)
        assert page.records == () and page.chain_ok

    def test_range_selects_but_flag_covers_everything(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        for i in range(10):
            add_task(ledger, aid, start=NOW + i * 100)
        page = ledger.history(aid, time_from=NOW + 200, time_to=NOW + 400)
        assert [r.started_at for r in page.records] == [NOW + 200, NOW + 300, NOW + 400]
        assert page.chain_ok

    def test_tampered_midpoint_flags_false_with_index(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        for i in range(10):
            add_task(ledger, aid, start=NOW + i)
        raw = ledger.registry._state.audit[aid.urn]
        raw[4] = {**raw[4], "actor": "evil"}
        page = ledger.history(aid)
        assert not page.chain_ok
        assert page.first_bad_index == 4

    def test_pagination_cursor_walk(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        for i in range(7):
            add_task(ledger, aid, start=NOW + i)
        seen = []
        cursor = None
        while True:
            page = ledger.history(aid, cursor=cursor, page_size=3)
            seen.extend(r.started_at for r in page.records)
            if page.next_cursor is None:
                break
            cursor = page.next_cursor
        assert seen == [NOW + i for i in range(7)]

    def test_bad_cursor(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        with pytest.raises(DomainError) as err:
            ledger.history(aid, cursor="not-base64!!")
        assert err.value.code == "BAD_CURSOR"


class TestBilling:
    def test_empty_period(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        summary = ledger.billing_summary(aid, period_from=0, period_to=10)
        assert (summary.task_count, summary.total_duration_seconds, summary.lines) == (0, 0, ())

    def test_two_tasks_sum(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        add_task(ledger, aid, start=NOW, duration=60)
        add_task(ledger, aid, start=NOW + 1000, duration=120)
        summary = ledger.billing_summary(aid, period_from=NOW, period_to=NOW + 2000)
        assert summary.task_count == 2
        assert summary.total_duration_seconds == 180
        assert len(summary.lines) == 2

    def test_failed_tasks_not_billed(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        add_task(ledger, aid, start=NOW, outcome=AuditOutcome.FAILED)
        add_task(ledger, aid, start=NOW + 10, outcome=AuditOutcome.OK)
        summary = ledger.billing_summary(aid, period_from=NOW, period_to=NOW + 100)
        assert summary.task_count == 1

    def test_totals_match_linear_scan_oracle(self, ledger):
        aid = ledger.registry.register(make_doc(), "alice")
        rng = random.Random(21)
        facts = []
        for _ in range(300):
            start = NOW + rng.randrange(100_000)
            duration = rng.randrange(600)
            outcome = rng.choice(list(AuditOutcome))
            add_task(ledger, aid, start=start, duration=duration, outcome=outcome)
            facts.append((start, duration, outcome))
        lo, hi = NOW + 20_000, NOW + 80_000
        summary = ledger.billing_summary(aid, period_from=lo, period_to=hi)
        expect = [
            (s, d) for s, d, o in facts
            if o is AuditOutcome.OK and s + d >= lo and s <= hi
        ]
        assert summary.task_count == len(expect)
        assert summary.total_duration_seconds == sum(d for _, d in expect)
