"""Cross-module properties that do not belong to any single operation."""

from __future__ import annotations

import random

from nanda.agentfacts.canonical import canonicalize
from nanda.agentfacts.model import AgentStatus
from nanda.safesearch.engine import run_search
from nanda.safesearch.query import SearchQuery
from nanda.testkit.scenario import Scenario, generate

from conftest import make_doc


class TestCanonicalDistinctness:
    def test_every_field_change_changes_doc_bytes(self):
        base = make_doc(regions=("US",), content_flags=("political",))
        variants = [
            base.with_(owner="other"),
            base.with_(capabilities=("education.tutoring", "travel.booking")),
            base.with_(content_flags=("gambling",)),
            base.with_(regions=("DE",)),
            base.with_(registered_at=base.registered_at + 1),
            base.with_(status=AgentStatus.PAUSED),
            base.with_(version=2),
        ]
        baseline = canonicalize(base.to_json_dict())
        seen = {baseline}
        for variant in variants:
            encoded = canonicalize(variant.to_json_dict())
            assert encoded != baseline
            assert encoded not in seen
            seen.add(encoded)


class TestSearchProperties:
    def setup_universe(self):
        return generate(Scenario(seed=909, agent_count=120, query_count=0))

    def run(self, universe, query: SearchQuery):
        results, _ = run_search(
            universe.docs(), query, universe.valid_claims, universe.now
        )
        return [r.agent_id for r in results]

    def test_adding_predicates_never_enlarges_results(self):
        universe = self.setup_universe()
        rng = random.Random(3)
        base = SearchQuery(limit=500)
        base_hits = set(self.run(universe, base))
        tighter_queries = [
            SearchQuery(limit=500, capability="education"),
            SearchQuery(limit=500, exclude_flags=frozenset({"political"})),
            SearchQuery(limit=500, requires_cert=frozenset({"kid-safe-cert-v1"})),
            SearchQuery(limit=500, min_reputation=10),
            SearchQuery(limit=500, regions=frozenset({"US", "DE"})),
        ]
        for query in tighter_queries:
            assert set(self.run(universe, query)) <= base_hits
        # And stacking predicates keeps shrinking (never growing).
        stacked = SearchQuery(
            limit=500,
            capability="education",
            exclude_flags=frozenset({"political"}),
            min_reputation=10,
        )
        assert set(self.run(universe, stacked)) <= set(
            self.run(universe, SearchQuery(limit=500, capability="education"))
        )
        del rng

    def test_identical_snapshot_and_query_give_identical_bytes(self):
        universe = self.setup_universe()
        query = SearchQuery(limit=500, capability="education")
        first, _ = run_search(universe.docs(), query, universe.valid_claims, universe.now)
        second, _ = run_search(universe.docs(), query, universe.valid_claims, universe.now)
        assert canonicalize([r.to_json_dict() for r in first]) == canonicalize(
            [r.to_json_dict() for r in second]
        )

    def test_filter_soundness_post_hoc(self):
        from nanda.safesearch.engine import matches

        universe = self.setup_universe()
        query = SearchQuery(
            limit=500, capability="education", exclude_flags=frozenset({"political"})
        )
        results, _ = run_search(
            universe.docs(), query, universe.valid_claims, universe.now
        )
        docs = {d.agent_id.urn: d for d in universe.docs()}
        for result in results:
            ok, reasons = matches(
                docs[result.agent_id],
                universe.valid_claims.get(result.agent_id, []),
                query,
                universe.now,
            )
            assert ok, (result.agent_id, reasons)


class TestReadOperationsArePure:
    def test_reads_do_not_mutate_registry_state(self):
        from nanda.avc.ledger import AvcLedger
        from nanda.index_core.clock import FixedClock
        from nanda.index_core.registry import Registry

        registry = Registry(clock=FixedClock())
        ledger = AvcLedger(registry)
        aid = registry.register(make_doc(), "alice")
        before = canonicalize(registry.state_dump())
        registry.get(aid)
        registry.resolve(aid)
        registry.list_docs()
        registry.ownership(aid)
        ledger.history(aid)
        ledger.billing_summary(aid, period_from=0, period_to=10)
        assert canonicalize(registry.state_dump()) == before


class TestDupStatusRefValidation:
    def test_reused_index_is_flagged(self):
        from nanda.agentfacts.model import validate_doc
        from test_ztaa import bare_claim

        first = bare_claim(claim_id="one")
        second = bare_claim(claim_id="two")  # same issuer, list, and index
        doc = make_doc(zone="edu", name="tutor-1", claims=(first, second))
        codes = {v.code for v in validate_doc(doc)}
        assert "DUP_STATUS_REF" in codes
