from __future__ import annotations

import dataclasses
import random
import uuid

import pytest

from nanda.agentfacts.ids import AgentId, did_for_public_key
from nanda.credentials.claims import (
    ClaimType,
    StatusRef,
    Verdict,
    VerifiableClaim,
    sign_claim,
)
from nanda.credentials.status_list import StatusListStore, new_status_list, revoke
from nanda.errors import DomainError
from nanda.index_core.clock import FixedClock
from nanda.index_core.registry import Registry
from nanda.ztaa.handshake import (
    ChallengeResponse,
    FactsVerdict,
    HandshakeParticipant,
    HandshakeState,
    PeerVerifiedUs,
    PolicyVerdict,
    ResolveFail,
    ResolveOk,
    bilateral_handshake,
    challenge_message,
    new_session,
    step,
)
from nanda.ztaa.nsa import NsaConfig, NsaTier, assess_nsa
from nanda.ztaa.policy import NsaRule, PolicyDecision, ZtaaPolicy, evaluate_policy

from conftest import make_doc, make_zone, seeded_key

DAY = 86_400
NOW = 1_750_000_000

A = AgentId(zone="edu", name="tutor-1")
B = AgentId(zone="biz", name="crm-bot")


def bare_claim(claim_type=ClaimType.TRUST_CERTIFICATION, body=None, claim_id=None):
    key = seeded_key("ztaa-issuer")
    return VerifiableClaim(
        claim_id=claim_id or str(uuid.uuid4()),
        subject=A,
        claim_type=claim_type,
        body=body or {"certification": "edu-verified"},
        issuer=did_for_public_key(key.public_bytes),
        issued_at=NOW,
        status_ref=StatusRef("main", 0),
        signature=b"",
    )


class TestAssessNsa:
    def claims(self, n, with_reputation):
        out = [bare_claim() for _ in range(n)]
        if with_reputation and out:
            out[0] = bare_claim(
                ClaimType.REPUTATION_SCORE, {"score": 70, "metric": "overall"}
            )
        return out

    def test_young_unattested_agent_is_quarantined(self):
        doc = make_doc(registered_at=NOW - 5 * DAY)
        assessment = assess_nsa(doc, [], NOW)
        assert assessment.tier is NsaTier.QUARANTINE
        assert assessment.age_days == 5
        assert assessment.valid_attestation_count == 0

    def test_mature_attested_reputable_agent_is_full(self):
        doc = make_doc(registered_at=NOW - 400 * DAY)
        assessment = assess_nsa(doc, self.claims(3, with_reputation=True), NOW)
        assert assessment.tier is NsaTier.FULL

    def test_truth_table_sweep(self):
        def oracle(age_days, attestations, has_reputation):
            if age_days < 30 or attestations < 2:
                return NsaTier.QUARANTINE
            return NsaTier.FULL if has_reputation else NsaTier.LIMITED

        for age in (29, 30, 31):
            for n in (1, 2, 3):
                for with_rep in (False, True):
                    doc = make_doc(registered_at=NOW - age * DAY)
                    got = assess_nsa(doc, self.claims(n, with_rep), NOW)
                    assert got.tier is oracle(age, n, with_rep), (age, n, with_rep)

    def test_clock_skew(self):
        doc = make_doc(registered_at=NOW + 10)
        with pytest.raises(DomainError) as err:
            assess_nsa(doc, [], NOW)
        assert err.value.code == "CLOCK_SKEW"

    def test_configurable_thresholds(self):
        doc = make_doc(registered_at=NOW - 2 * DAY)
        relaxed = NsaConfig(min_age_days=1, min_attestations=0)
        assert assess_nsa(doc, [], NOW, relaxed).tier is NsaTier.LIMITED


def full_nsa():
    from nanda.ztaa.nsa import NsaAssessment

    return NsaAssessment(tier=NsaTier.FULL, age_days=400, valid_attestation_count=3)


def quarantine_nsa():
    from nanda.ztaa.nsa import NsaAssessment

    return NsaAssessment(tier=NsaTier.QUARANTINE, age_days=1, valid_attestation_count=0)


class TestEvaluatePolicy:
    def test_denied_region(self):
        doc = make_doc(regions=("IR",))
        decision = evaluate_policy(
            doc, [], full_nsa(), ZtaaPolicy(denied_regions=frozenset({"IR", "KP"}))
        )
        assert not decision.allow and "REGION_DENIED" in decision.reasons

    def test_empty_policy_allows_full_tier_agent(self):
        decision = evaluate_policy(make_doc(), [], full_nsa(), ZtaaPolicy())
        assert decision.allow and not decision.log_required

    def test_category_allow_list(self):
        doc = make_doc(capabilities=("education.tutoring",))
        allow = ZtaaPolicy(allowed_categories=frozenset({"education"}))
        deny = ZtaaPolicy(allowed_categories=frozenset({"finance"}))
        assert evaluate_policy(doc, [], full_nsa(), allow).allow
        decision = evaluate_policy(doc, [], full_nsa(), deny)
        assert not decision.allow and "CATEGORY_NOT_ALLOWED" in decision.reasons

    def test_nsa_block_vs_allow_with_log(self):
        doc = make_doc(registered_at=NOW - DAY)
        blocked = evaluate_policy(doc, [], quarantine_nsa(), ZtaaPolicy(nsa_rule=NsaRule.BLOCK))
        assert not blocked.allow and "NSA_BLOCKED" in blocked.reasons
        logged = evaluate_policy(
            doc, [], quarantine_nsa(), ZtaaPolicy(nsa_rule=NsaRule.ALLOW_WITH_LOG)
        )
        assert logged.allow and logged.log_required

    def test_reputation_floor(self):
        low = [bare_claim(ClaimType.REPUTATION_SCORE, {"score": 10, "metric": "overall"})]
        decision = evaluate_policy(
            make_doc(), low, full_nsa(), ZtaaPolicy(min_reputation=50)
        )
        assert not decision.allow and "REPUTATION_BELOW_MIN" in decision.reasons
        decision = evaluate_policy(make_doc(), [], full_nsa(), ZtaaPolicy(min_reputation=50))
        assert not decision.allow and "REPUTATION_UNKNOWN" in decision.reasons

    def test_random_policies_match_conjunction_oracle(self):
        rng = random.Random(17)
        flags_pool = ["political", "gambling", "adult_content"]
        caps_pool = ["education.tutoring", "finance.advice", "travel.booking"]
        regions_pool = ["US", "DE", "IR", "KP"]
        certs_pool = ["kid-safe-cert-v1", "soc2-audited"]

        for _ in range(200):
            doc = make_doc(
                capabilities=tuple(sorted(rng.sample(caps_pool, rng.randint(1, 2)))),
                content_flags=tuple(sorted(rng.sample(flags_pool, rng.randint(0, 2)))),
                regions=tuple(sorted(rng.sample(regions_pool, rng.randint(0, 2)))),
            )
            claims = []
            if rng.random() < 0.5:
                claims.append(
                    bare_claim(
                        ClaimType.REPUTATION_SCORE,
                        {"score": rng.randrange(101), "metric": "overall"},
                    )
                )
            if rng.random() < 0.5:
                claims.append(
                    bare_claim(
                        ClaimType.TRUST_CERTIFICATION,
                        {"certification": rng.choice(certs_pool)},
                    )
                )
            policy = ZtaaPolicy(
                allowed_categories=frozenset(
                    rng.sample(["education", "finance", "travel"], rng.randint(0, 2))
                ),
                denied_flags=frozenset(rng.sample(flags_pool, rng.randint(0, 2))),
                min_reputation=rng.choice([None, 20, 60]),
                denied_regions=frozenset(rng.sample(regions_pool, rng.randint(0, 2))),
                required_certs=frozenset(rng.sample(certs_pool, rng.randint(0, 1))),
                nsa_rule=rng.choice(list(NsaRule)),
            )
            nsa = rng.choice([full_nsa(), quarantine_nsa()])

            # Independent conjunction, written long-hand.
            scores = sorted(
                c.body["score"] for c in claims if c.claim_type is ClaimType.REPUTATION_SCORE
            )
            rep = scores[(len(scores) + 1) // 2 - 1] if scores else None
            certs = {
                c.body["certification"]
                for c in claims
                if c.claim_type is ClaimType.TRUST_CERTIFICATION
            }
            expected = True
            if policy.allowed_categories and not any(
                c == p or c.startswith(p + ".")
                for c in doc.capabilities
                for p in policy.allowed_categories
            ):
                expected = False
            if set(doc.content_flags) & policy.denied_flags:
                expected = False
            if set(doc.regions) & policy.denied_regions:
                expected = False
            if policy.min_reputation is not None and (rep is None or rep < policy.min_reputation):
                expected = False
            if not policy.required_certs <= certs:
                expected = False
            if nsa.tier is NsaTier.QUARANTINE and policy.nsa_rule is NsaRule.BLOCK:
                expected = False

            got = evaluate_policy(doc, claims, nsa, policy)
            assert got.allow == expected

    def test_monotonicity_adding_denials_never_allows(self):
        rng = random.Random(4)
        doc = make_doc(
            capabilities=("education.tutoring",),
            content_flags=("political",),
            regions=("US", "DE"),
        )
        for _ in range(50):
            base = ZtaaPolicy(
                denied_flags=frozenset(rng.sample(["political", "gambling"], rng.randint(0, 1))),
                denied_regions=frozenset(rng.sample(["US", "IR"], rng.randint(0, 1))),
            )
            stricter = ZtaaPolicy(
                denied_flags=base.denied_flags | {"political"},
                denied_regions=base.denied_regions | {"DE"},
            )
            before = evaluate_policy(doc, [], full_nsa(), base).allow
            after = evaluate_policy(doc, [], full_nsa(), stricter).allow
            assert not (after and not before)
            assert not after  # stricter policy denies this doc outright


def resolution_for(doc) -> dict:
    return {
        "agent_id": doc.agent_id.urn,
        "did": str(doc.did),
        "endpoints": [e.to_json_dict() for e in doc.endpoints],
        "status": doc.status.value,
    }


def drive_to_challenge(target_doc, initiator=A):
    session = new_session(initiator, target_doc.agent_id)
    session = step(session, ResolveOk(resolution_for(target_doc)), now=NOW)
    session = step(session, FactsVerdict(verdicts={}, policy_relevant=frozenset()), now=NOW)
    assert session.state is HandshakeState.CHALLENGE_SENT
    return session


class TestStep:
    def test_init_plus_resolve_ok(self):
        doc = make_doc(zone=B.zone, name=B.name)
        session = new_session(A, B)
        session = step(session, ResolveOk(resolution_for(doc)), now=NOW)
        assert session.state is HandshakeState.RESOLVED
        assert str(session.target_did) == str(doc.did)

    def test_resolve_fail_rejects(self):
        session = step(new_session(A, B), ResolveFail("NOT_FOUND"), now=NOW)
        assert session.state is HandshakeState.REJECTED
        assert session.reject_reason == "REASON_RESOLVE_FAILED"

    def test_out_of_order_event_is_illegal_not_rejected(self):
        session = new_session(A, B)
        with pytest.raises(DomainError) as err:
            step(session, PeerVerifiedUs(True), now=NOW)
        assert err.value.code == "ILLEGAL_EVENT"
        assert session.state is HandshakeState.INIT

    def test_terminal_session_accepts_nothing(self):
        session = step(new_session(A, B), ResolveFail(), now=NOW)
        with pytest.raises(DomainError) as err:
            step(session, ResolveOk({}), now=NOW)
        assert err.value.code == "ILLEGAL_EVENT"

    def test_facts_verdict_with_revoked_claim(self):
        doc = make_doc(zone=B.zone, name=B.name)
        session = new_session(A, B)
        session = step(session, ResolveOk(resolution_for(doc)), now=NOW)
        session = step(
            session,
            FactsVerdict(verdicts={"c1": Verdict.REVOKED}, policy_relevant=frozenset()),
            now=NOW,
        )
        assert session.state is HandshakeState.REJECTED
        assert session.reject_reason == "REASON_REVOKED_CLAIM"

    def test_facts_verdict_with_invalid_relevant_claim(self):
        doc = make_doc(zone=B.zone, name=B.name)
        session = new_session(A, B)
        session = step(session, ResolveOk(resolution_for(doc)), now=NOW)
        session = step(
            session,
            FactsVerdict(
                verdicts={"c1": Verdict.UNKNOWN_ISSUER}, policy_relevant=frozenset({"c1"})
            ),
            now=NOW,
        )
        assert session.reject_reason == "REASON_INVALID_CLAIM"

    def test_unverifiable_irrelevant_claim_is_tolerated(self):
        doc = make_doc(zone=B.zone, name=B.name)
        session = new_session(A, B)
        session = step(session, ResolveOk(resolution_for(doc)), now=NOW)
        session = step(
            session,
            FactsVerdict(
                verdicts={"c1": Verdict.UNTRUSTED_ZONE}, policy_relevant=frozenset()
            ),
            now=NOW,
        )
        assert session.state is HandshakeState.CHALLENGE_SENT
        assert session.visited(HandshakeState.TARGET_FACTS_VERIFIED)

    def test_wrong_key_challenge_response(self):
        key = seeded_key("the-agent-b")
        doc = make_doc(zone=B.zone, name=B.name, key=key)
        session = drive_to_challenge(doc)
        rogue = seeded_key("rogue")
        signature = rogue.sign(challenge_message(session.nonce_i, A, doc.agent_id))
        session = step(
            session, ChallengeResponse(public_key=rogue.public_bytes, signature=signature),
            now=NOW,
        )
        assert session.state is HandshakeState.REJECTED
        assert session.reject_reason == "REASON_BAD_CHALLENGE"

    def test_valid_challenge_then_peer_then_policy(self):
        key = seeded_key("the-agent-b")
        doc = make_doc(zone=B.zone, name=B.name, key=key)
        session = drive_to_challenge(doc)
        signature = key.sign(challenge_message(session.nonce_i, A, doc.agent_id))
        session = step(
            session, ChallengeResponse(public_key=key.public_bytes, signature=signature),
            now=NOW,
        )
        assert session.state is HandshakeState.CHALLENGE_SENT and session.challenge_verified
        session = step(session, PeerVerifiedUs(True), now=NOW)
        assert session.state is HandshakeState.MUTUALLY_AUTHENTICATED
        session = step(session, PolicyVerdict(PolicyDecision(allow=True)), now=NOW)
        assert session.state is HandshakeState.ESTABLISHED
        order = [e.to_state for e in session.transcript]
        for required in (
            HandshakeState.TARGET_FACTS_VERIFIED,
            HandshakeState.MUTUALLY_AUTHENTICATED,
            HandshakeState.POLICY_CLEARED,
        ):
            assert required in order
        assert order.index(HandshakeState.TARGET_FACTS_VERIFIED) < order.index(
            HandshakeState.MUTUALLY_AUTHENTICATED
        ) < order.index(HandshakeState.POLICY_CLEARED) < order.index(HandshakeState.ESTABLISHED)

    def test_peer_confirmation_may_arrive_first(self):
        key = seeded_key("the-agent-b")
        doc = make_doc(zone=B.zone, name=B.name, key=key)
        session = drive_to_challenge(doc)
        session = step(session, PeerVerifiedUs(True), now=NOW)
        assert session.state is HandshakeState.CHALLENGE_SENT
        signature = key.sign(challenge_message(session.nonce_i, A, doc.agent_id))
        session = step(
            session, ChallengeResponse(public_key=key.public_bytes, signature=signature),
            now=NOW,
        )
        assert session.state is HandshakeState.MUTUALLY_AUTHENTICATED

    def test_duplicate_evidence_is_illegal(self):
        key = seeded_key("the-agent-b")
        doc = make_doc(zone=B.zone, name=B.name, key=key)
        session = drive_to_challenge(doc)
        session = step(session, PeerVerifiedUs(True), now=NOW)
        with pytest.raises(DomainError) as err:
            step(session, PeerVerifiedUs(True), now=NOW)
        assert err.value.code == "ILLEGAL_EVENT"

    def test_policy_deny_reason_mapping(self):
        key = seeded_key("the-agent-b")
        doc = make_doc(zone=B.zone, name=B.name, key=key)

        def authenticated():
            session = drive_to_challenge(doc)
            signature = key.sign(challenge_message(session.nonce_i, A, doc.agent_id))
            session = step(
                session,
                ChallengeResponse(public_key=key.public_bytes, signature=signature),
                now=NOW,
            )
            return step(session, PeerVerifiedUs(True), now=NOW)

        denied = step(
            authenticated(),
            PolicyVerdict(PolicyDecision(allow=False, reasons=("REGION_DENIED",))),
            now=NOW,
        )
        assert denied.reject_reason == "REASON_POLICY_DENY"
        blocked = step(
            authenticated(),
            PolicyVerdict(PolicyDecision(allow=False, reasons=("NSA_BLOCKED",))),
            now=NOW,
        )
        assert blocked.reject_reason == "REASON_NSA_BLOCK"

    def test_step_is_pure_and_only_grows_transcript(self):
        doc = make_doc(zone=B.zone, name=B.name)
        before = new_session(A, B)
        frozen = dataclasses.replace(before)
        after = step(before, ResolveOk(resolution_for(doc)), now=NOW)
        assert before == frozen
        assert after.transcript[: len(before.transcript)] == before.transcript
        assert len(after.transcript) == len(before.transcript) + 1


@pytest.fixture
def handshake_world(trust_env):
    """Two mature, certified, reputable agents in one registry."""
    store, keys = trust_env
    clock = FixedClock(NOW)
    registry = Registry(clock=clock)
    status_lists = StatusListStore()

    certifier = keys["home"]["certifier"]
    auditor = keys["home"]["auditor"]
    cert_did = did_for_public_key(certifier.public_bytes)
    audit_did = did_for_public_key(auditor.public_bytes)
    status_lists.put(new_status_list(cert_did, "main", certifier, now=NOW, size_bits=64))
    status_lists.put(new_status_list(audit_did, "main", auditor, now=NOW, size_bits=64))

    participants = {}
    for i, (zone, name) in enumerate((("edu", "tutor-1"), ("biz", "crm-bot"))):
        key = seeded_key(f"hs-agent/{zone}/{name}")
        agent_id = AgentId(zone=zone, name=name)
        claims = (
            sign_claim(
                claim_id=f"cert-{zone}-{name}",
                subject=agent_id,
                claim_type=ClaimType.TRUST_CERTIFICATION,
                body={"certification": "kid-safe-cert-v1"},
                issuer=cert_did,
                issued_at=NOW - 200 * DAY,
                status_ref=StatusRef("main", i),
                issuer_key=certifier,
                trust_store=store,
            ),
            sign_claim(
                claim_id=f"rep-{zone}-{name}",
                subject=agent_id,
                claim_type=ClaimType.REPUTATION_SCORE,
                body={"score": 85, "metric": "overall"},
                issuer=audit_did,
                issued_at=NOW - 200 * DAY,
                status_ref=StatusRef("main", i + 8),
                issuer_key=auditor,
                trust_store=store,
            ),
        )
        doc = make_doc(zone=zone, name=name, key=key, claims=claims,
                       capabilities=("education.tutoring",))
        clock.set(NOW - 200 * DAY)
        registry.register(doc, doc.owner)
        clock.set(NOW)
        participants[zone] = HandshakeParticipant(
            doc=registry.get(agent_id), key=key, policy=ZtaaPolicy()
        )

    return {
        "store": store,
        "keys": keys,
        "clock": clock,
        "registry": registry,
        "status_lists": status_lists,
        "a": participants["edu"],
        "b": participants["biz"],
        "cert_issuer": (cert_did, certifier),
    }


class TestBilateralHandshake:
    def test_happy_path_establishes_both_sides(self, handshake_world):
        w = handshake_world
        outcome = bilateral_handshake(
            w["a"], w["b"],
            registry=w["registry"], trust_store=w["store"],
            status_lists=w["status_lists"], clock=w["clock"],
        )
        assert outcome.established
        assert outcome.initiator_session.state is HandshakeState.ESTABLISHED
        assert outcome.target_session.state is HandshakeState.ESTABLISHED

    def test_nonces_are_fresh_per_session(self, handshake_world):
        w = handshake_world
        first = bilateral_handshake(
            w["a"], w["b"], registry=w["registry"], trust_store=w["store"],
            status_lists=w["status_lists"], clock=w["clock"],
        )
        second = bilateral_handshake(
            w["a"], w["b"], registry=w["registry"], trust_store=w["store"],
            status_lists=w["status_lists"], clock=w["clock"],
        )
        nonces = {
            first.initiator_session.nonce_i, first.target_session.nonce_i,
            second.initiator_session.nonce_i, second.target_session.nonce_i,
        }
        assert len(nonces) == 4

    def test_revoked_claim_mid_handshake(self, handshake_world):
        w = handshake_world
        cert_did, certifier = w["cert_issuer"]
        current = w["status_lists"].get(cert_did, "main")
        # Index 1 is the target's certification claim.
        w["status_lists"].put(revoke(current, 1, certifier, now=NOW))
        outcome = bilateral_handshake(
            w["a"], w["b"], registry=w["registry"], trust_store=w["store"],
            status_lists=w["status_lists"], clock=w["clock"],
        )
        assert not outcome.established
        assert outcome.initiator_session.state is HandshakeState.REJECTED
        assert outcome.initiator_session.reject_reason == "REASON_REVOKED_CLAIM"

    def test_replayed_challenge_response_rejected(self, handshake_world):
        w = handshake_world
        b = w["b"]
        old = new_session(w["a"].doc.agent_id, b.doc.agent_id)
        stale_signature = b.key.sign(
            challenge_message(old.nonce_i, w["a"].doc.agent_id, b.doc.agent_id)
        )
        fresh = drive_to_challenge(b.doc, initiator=w["a"].doc.agent_id)
        replayed = step(
            fresh,
            ChallengeResponse(public_key=b.key.public_bytes, signature=stale_signature),
            now=NOW,
        )
        assert replayed.state is HandshakeState.REJECTED
        assert replayed.reject_reason == "REASON_BAD_CHALLENGE"

    def test_terminated_target_fails_resolution(self, handshake_world):
        w = handshake_world
        w["registry"].delete(w["b"].doc.agent_id, w["b"].doc.owner)
        outcome = bilateral_handshake(
            w["a"], w["b"], registry=w["registry"], trust_store=w["store"],
            status_lists=w["status_lists"], clock=w["clock"],
        )
        assert not outcome.established
        assert outcome.initiator_session.reject_reason == "REASON_RESOLVE_FAILED"

    def test_policy_deny_on_one_side_fails_both(self, handshake_world):
        w = handshake_world
        strict_a = HandshakeParticipant(
            doc=w["a"].doc, key=w["a"].key,
            policy=ZtaaPolicy(denied_flags=frozenset({"political"})),
        )
        flagged_b_doc = w["b"].doc
        w["registry"].update(
            flagged_b_doc.agent_id,
            flagged_b_doc.with_(version=2, content_flags=("political",)),
            flagged_b_doc.owner,
        )
        refreshed_b = HandshakeParticipant(
            doc=w["registry"].get(flagged_b_doc.agent_id), key=w["b"].key, policy=ZtaaPolicy()
        )
        outcome = bilateral_handshake(
            strict_a, refreshed_b, registry=w["registry"], trust_store=w["store"],
            status_lists=w["status_lists"], clock=w["clock"],
        )
        assert not outcome.established
        assert outcome.initiator_session.reject_reason == "REASON_POLICY_DENY"
        # Policy is a local decision: the other side may clear its own checks,
        # but no collaboration exists unless both sides establish.
        assert outcome.target_session.state is HandshakeState.ESTABLISHED
