"""The bilateral handshake state machine.

One session models one side's view of one collaboration attempt:

    INIT -> RESOLVED -> TARGET_FACTS_VERIFIED -> CHALLENGE_SENT
         -> MUTUALLY_AUTHENTICATED -> POLICY_CLEARED -> ESTABLISHED

with every state also allowed to fall to REJECTED. ``step`` is pure: it
returns a new session whose transcript grew by the transitions taken and
touches nothing else.

Two transitions fire in pairs. A facts verdict that clears every relevant
claim lands in TARGET_FACTS_VERIFIED and immediately issues the challenge
(nothing sits between the two, the nonce exists from session creation), and
an ALLOW policy verdict lands in POLICY_CLEARED and immediately establishes.
Both intermediate states appear in the transcript, so "ESTABLISHED only via
POLICY_CLEARED" is checkable on the record.

Mutual authentication needs two independent pieces of evidence in
CHALLENGE_SENT, in either order: the target's signature over our nonce, and
the peer's confirmation that it verified us symmetrically. Each may arrive
once; a repeat is a protocol-order error (ILLEGAL_EVENT), never a rejection.

The challenge response is verified against the key committed to by the
target's ``did:nanda`` from its registry record, so transport identity is
never trusted. A signature replayed from another session fails because the
signed message pins this session's nonce.
"""

from __future__ import annotations

import os
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Optional, Union

from nanda.agentfacts.canonical import canonical_sha256, canonicalize
from nanda.agentfacts.ids import AgentId, Did, parse_did
from nanda.agentfacts.model import AgentFactsDoc
from nanda.credentials.claims import Verdict, VerifiableClaim, verdicts_for
from nanda.credentials.keys import SigningKey, verify_signature
from nanda.credentials.status_list import StatusListStore
from nanda.credentials.trust import TrustStore, cross_trust_depth
from nanda.errors import DomainError
from nanda.index_core.clock import Clock
from nanda.index_core.registry import Registry, ResolutionResult
from nanda.ztaa.nsa import NsaConfig, assess_nsa
from nanda.ztaa.policy import (
    DENY_NSA_BLOCKED,
    PolicyDecision,
    ZtaaPolicy,
    evaluate_policy,
)

ILLEGAL_EVENT = "ILLEGAL_EVENT"

REASON_RESOLVE_FAILED = "REASON_RESOLVE_FAILED"
REASON_REVOKED_CLAIM = "REASON_REVOKED_CLAIM"
REASON_INVALID_CLAIM = "REASON_INVALID_CLAIM"
REASON_BAD_CHALLENGE = "REASON_BAD_CHALLENGE"
REASON_PEER_REJECTED = "REASON_PEER_REJECTED"
REASON_POLICY_DENY = "REASON_POLICY_DENY"
REASON_NSA_BLOCK = "REASON_NSA_BLOCK"


class HandshakeState(str, Enum):
    INIT = "INIT"
    RESOLVED = "RESOLVED"
    TARGET_FACTS_VERIFIED = "TARGET_FACTS_VERIFIED"
    CHALLENGE_SENT = "CHALLENGE_SENT"
    MUTUALLY_AUTHENTICATED = "MUTUALLY_AUTHENTICATED"
    POLICY_CLEARED = "POLICY_CLEARED"
    ESTABLISHED = "ESTABLISHED"
    REJECTED = "REJECTED"


TERMINAL_STATES = frozenset({HandshakeState.ESTABLISHED, HandshakeState.REJECTED})


# -- events --------------------------------------------------------------------


@dataclass(frozen=True)
class ResolveOk:
    resolution: dict  # canonical form of a ResolutionResult


@dataclass(frozen=True)
class ResolveFail:
    detail: str = "name resolution failed"


@dataclass(frozen=True)
class FactsVerdict:
    verdicts: dict  # claim_id -> Verdict
    policy_relevant: frozenset


@dataclass(frozen=True)
class ChallengeResponse:
    public_key: bytes
    signature: bytes


@dataclass(frozen=True)
class PeerVerifiedUs:
    confirmed: bool


@dataclass(frozen=True)
class PolicyVerdict:
    decision: PolicyDecision


HandshakeEvent = Union[
    ResolveOk, ResolveFail, FactsVerdict, ChallengeResponse, PeerVerifiedUs, PolicyVerdict
]


@dataclass(frozen=True)
class TranscriptEntry:
    from_state: HandshakeState
    to_state: HandshakeState
    at: int
    evidence_digest: str

    def to_json_dict(self) -> dict:
        return {
            "from": self.from_state.value,
            "to": self.to_state.value,
            "at": self.at,
            "evidence": self.evidence_digest,
        }


@dataclass(frozen=True)
class HandshakeSession:
    session_id: str
    initiator: AgentId
    target: AgentId
    state: HandshakeState
    nonce_i: bytes
    nonce_t: bytes
    transcript: tuple[TranscriptEntry, ...] = ()
    reject_reason: Optional[str] = None
    target_did: Optional[Did] = None
    challenge_verified: bool = False
    peer_confirmed: bool = False

    def visited(self, state: HandshakeState) -> bool:
        return any(e.to_state is state for e in self.transcript)

    def to_json_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "initiator": self.initiator.urn,
            "target": self.target.urn,
            "state": self.state.value,
            "nonce_i": self.nonce_i.hex(),
            "nonce_t": self.nonce_t.hex(),
            "transcript": [e.to_json_dict() for e in self.transcript],
            "reject_reason": self.reject_reason,
            "target_did": None if self.target_did is None else str(self.target_did),
            "challenge_verified": self.challenge_verified,
            "peer_confirmed": self.peer_confirmed,
        }


def new_session(
    initiator: AgentId,
    target: AgentId,
    *,
    nonce_i: Optional[bytes] = None,
    nonce_t: Optional[bytes] = None,
    session_id: Optional[str] = None,
) -> HandshakeSession:
    return HandshakeSession(
        session_id=session_id or str(uuid.uuid4()),
        initiator=initiator,
        target=target,
        state=HandshakeState.INIT,
        nonce_i=nonce_i if nonce_i is not None else os.urandom(32),
        nonce_t=nonce_t if nonce_t is not None else os.urandom(32),
    )


def challenge_message(nonce: bytes, initiator: AgentId, target: AgentId) -> bytes:
    """The bytes a target must sign to answer a challenge."""
    return canonicalize(
        {
            "handshake_challenge": {
                "nonce": nonce.hex(),
                "initiator": initiator.urn,
                "target": target.urn,
            }
        }
    )


@lru_cache(maxsize=8192)
def _verify_challenge_cached(public_key: bytes, message: bytes, signature: bytes) -> bool:
    # Pure function of its inputs; the cache only saves repeated curve math
    # when the same response is re-checked (retries, state-space sweeps).
    return verify_signature(public_key, message, signature)


def _evidence(body) -> str:
    return canonical_sha256(body).hex()


def _advance(
    session: HandshakeSession, to_state: HandshakeState, at: int, evidence: str, **changes
) -> HandshakeSession:
    entry = TranscriptEntry(
        from_state=session.state, to_state=to_state, at=at, evidence_digest=evidence
    )
    return replace(
        session,
        state=to_state,
        transcript=session.transcript + (entry,),
        **changes,
    )


def _reject(session: HandshakeSession, reason: str, at: int, evidence: str) -> HandshakeSession:
    return _advance(session, HandshakeState.REJECTED, at, evidence, reject_reason=reason)


def _illegal(session: HandshakeSession, event: HandshakeEvent) -> DomainError:
    return DomainError(
        ILLEGAL_EVENT,
        f"{type(event).__name__} is not valid in state {session.state.value}",
    )


def step(session: HandshakeSession, event: HandshakeEvent, *, now: int = 0) -> HandshakeSession:
    """Apply one protocol event; returns the successor session.

    Raises ILLEGAL_EVENT for out-of-order events (a driver bug or a confused
    peer), which is deliberately distinct from REJECTED (a failed check).
    """
    if session.state in TERMINAL_STATES:
        raise _illegal(session, event)

    state = session.state

    if isinstance(event, ResolveOk):
        if state is not HandshakeState.INIT:
            raise _illegal(session, event)
        evidence = _evidence(event.resolution)
        did = parse_did(event.resolution["did"])
        return _advance(session, HandshakeState.RESOLVED, now, evidence, target_did=did)

    if isinstance(event, ResolveFail):
        if state is not HandshakeState.INIT:
            raise _illegal(session, event)
        return _reject(session, REASON_RESOLVE_FAILED, now, _evidence(event.detail))

    if isinstance(event, FactsVerdict):
        if state is not HandshakeState.RESOLVED:
            raise _illegal(session, event)
        verdict_names = {cid: v.value for cid, v in sorted(event.verdicts.items())}
        evidence = _evidence({"verdicts": verdict_names})
        # Presenting any revoked credential is disqualifying on its own;
        # other failures matter only for claims the policy relies on.
        if any(v is Verdict.REVOKED for v in event.verdicts.values()):
            return _reject(session, REASON_REVOKED_CLAIM, now, evidence)
        for claim_id in sorted(event.policy_relevant):
            if event.verdicts.get(claim_id) is not Verdict.VALID:
                return _reject(session, REASON_INVALID_CLAIM, now, evidence)
        session = _advance(session, HandshakeState.TARGET_FACTS_VERIFIED, now, evidence)
        # The challenge goes out the moment facts verify; the nonce has
        # existed since session creation.
        return _advance(
            session, HandshakeState.CHALLENGE_SENT, now, _evidence(session.nonce_i.hex())
        )

    if isinstance(event, ChallengeResponse):
        if state is not HandshakeState.CHALLENGE_SENT or session.challenge_verified:
            raise _illegal(session, event)
        evidence = _evidence(
            {"public_key": event.public_key.hex(), "signature": event.signature.hex()}
        )
        did = session.target_did
        message = challenge_message(session.nonce_i, session.initiator, session.target)
        key_bound = did is not None and did.matches_public_key(event.public_key)
        if not key_bound or not _verify_challenge_cached(
            event.public_key, message, event.signature
        ):
            return _reject(session, REASON_BAD_CHALLENGE, now, evidence)
        session = replace(session, challenge_verified=True)
        if session.peer_confirmed:
            return _advance(session, HandshakeState.MUTUALLY_AUTHENTICATED, now, evidence)
        return _advance(session, HandshakeState.CHALLENGE_SENT, now, evidence)

    if isinstance(event, PeerVerifiedUs):
        if state is not HandshakeState.CHALLENGE_SENT or session.peer_confirmed:
            raise _illegal(session, event)
        evidence = _evidence({"peer_confirmed": event.confirmed})
        if not event.confirmed:
            return _reject(session, REASON_PEER_REJECTED, now, evidence)
        session = replace(session, peer_confirmed=True)
        if session.challenge_verified:
            return _advance(session, HandshakeState.MUTUALLY_AUTHENTICATED, now, evidence)
        return _advance(session, HandshakeState.CHALLENGE_SENT, now, evidence)

    if isinstance(event, PolicyVerdict):
        if state is not HandshakeState.MUTUALLY_AUTHENTICATED:
            raise _illegal(session, event)
        evidence = _evidence(event.decision.to_json_dict())
        if not event.decision.allow:
            reason = (
                REASON_NSA_BLOCK
                if DENY_NSA_BLOCKED in event.decision.reasons
                else REASON_POLICY_DENY
            )
            return _reject(session, reason, now, evidence)
        session = _advance(session, HandshakeState.POLICY_CLEARED, now, evidence)
        # Policy was the last gate; nothing sits between clearance and
        # establishment.
        return _advance(session, HandshakeState.ESTABLISHED, now, evidence)

    raise _illegal(session, event)


# -- the bilateral driver ---------------------------------------------------------


@dataclass(frozen=True)
class HandshakeParticipant:
    doc: AgentFactsDoc
    key: SigningKey
    policy: ZtaaPolicy


@dataclass(frozen=True)
class HandshakeOutcome:
    established: bool
    initiator_session: HandshakeSession
    target_session: HandshakeSession
    policy_logs: tuple[str, ...] = ()  # agents whose policy said ALLOW_WITH_LOG

    def to_json_dict(self) -> dict:
        return {
            "established": self.established,
            "initiator_session": self.initiator_session.to_json_dict(),
            "target_session": self.target_session.to_json_dict(),
            "policy_logs": list(self.policy_logs),
        }


def policy_relevant_claim_ids(doc: AgentFactsDoc, policy: ZtaaPolicy) -> frozenset[str]:
    """Claims whose validity the policy decision will lean on."""
    relevant: set[str] = set()
    for claim in doc.claims:
        kind = claim.claim_type.value
        if kind == "TRUST_CERTIFICATION":
            if str(claim.body.get("certification")) in policy.required_certs:
                relevant.add(claim.claim_id)
        elif kind == "REPUTATION_SCORE":
            if policy.min_reputation is not None:
                relevant.add(claim.claim_id)
        elif kind == "CONTENT_FLAG_ATTESTATION":
            if policy.denied_flags:
                relevant.add(claim.claim_id)
        elif kind == "CAPABILITY_ATTESTATION":
            if policy.allowed_categories:
                relevant.add(claim.claim_id)
    return frozenset(relevant)


def claims_within_policy_depth(
    doc: AgentFactsDoc,
    verdicts: dict,
    trust_store: TrustStore,
    policy: ZtaaPolicy,
) -> list[VerifiableClaim]:
    usable: list[VerifiableClaim] = []
    for claim in doc.claims:
        if verdicts.get(claim.claim_id) is not Verdict.VALID:
            continue
        found = trust_store.find_issuer(claim.issuer)
        if found is None:
            continue
        depth = cross_trust_depth(trust_store, trust_store.local_zone_id, found[0])
        if depth is not None and depth <= policy.max_chain_zones:
            usable.append(claim)
    return usable


def _drive_one_side(
    session: HandshakeSession,
    target: HandshakeParticipant,
    viewer_policy: ZtaaPolicy,
    registry: Registry,
    trust_store: TrustStore,
    status_lists: StatusListStore,
    now: int,
) -> HandshakeSession:
    """Advance a session through resolution, facts, and our own challenge."""
    try:
        resolution: ResolutionResult = registry.resolve(session.target)
        session = step(session, ResolveOk(resolution.to_json_dict()), now=now)
    except DomainError as err:
        return step(session, ResolveFail(err.code), now=now)

    verdicts = verdicts_for(target.doc.claims, trust_store, status_lists, now)
    relevant = policy_relevant_claim_ids(target.doc, viewer_policy)
    session = step(session, FactsVerdict(verdicts=verdicts, policy_relevant=relevant), now=now)
    if session.state in TERMINAL_STATES:
        return session

    # The target answers our challenge by signing this session's nonce under
    # its registered DID key.
    signature = target.key.sign(
        challenge_message(session.nonce_i, session.initiator, session.target)
    )
    return step(
        session,
        ChallengeResponse(public_key=target.key.public_bytes, signature=signature),
        now=now,
    )


def _finish_side(
    session: HandshakeSession,
    peer_succeeded: bool,
    target: HandshakeParticipant,
    viewer_policy: ZtaaPolicy,
    trust_store: TrustStore,
    status_lists: StatusListStore,
    now: int,
    nsa_config: NsaConfig,
) -> tuple[HandshakeSession, bool]:
    """Deliver the peer confirmation and the policy verdict; returns
    (terminal session, whether policy asked for an audit log entry)."""
    if session.state in TERMINAL_STATES:
        return session, False
    session = step(session, PeerVerifiedUs(confirmed=peer_succeeded), now=now)
    if session.state in TERMINAL_STATES:
        return session, False

    verdicts = verdicts_for(target.doc.claims, trust_store, status_lists, now)
    usable = claims_within_policy_depth(target.doc, verdicts, trust_store, viewer_policy)
    nsa = assess_nsa(target.doc, usable, now, nsa_config)
    decision = evaluate_policy(target.doc, usable, nsa, viewer_policy)
    session = step(session, PolicyVerdict(decision=decision), now=now)
    return session, decision.allow and decision.log_required


def bilateral_handshake(
    initiator: HandshakeParticipant,
    target: HandshakeParticipant,
    *,
    registry: Registry,
    trust_store: TrustStore,
    status_lists: StatusListStore,
    clock: Clock,
    nsa_config: NsaConfig = NsaConfig(),
) -> HandshakeOutcome:
    """Run both directions to terminal states with fresh nonces.

    ESTABLISHED only when both sides independently finish; either side's
    rejection surfaces as the outcome's reason via its transcript.
    """
    now = clock.now()
    a_id = initiator.doc.agent_id
    b_id = target.doc.agent_id

    ab = new_session(a_id, b_id)
    ba = new_session(b_id, a_id)

    ab = _drive_one_side(ab, target, initiator.policy, registry, trust_store, status_lists, now)
    ba = _drive_one_side(ba, initiator, target.policy, registry, trust_store, status_lists, now)

    ab, log_a = _finish_side(
        ab, ba.challenge_verified, target, initiator.policy,
        trust_store, status_lists, now, nsa_config,
    )
    ba, log_b = _finish_side(
        ba, ab.challenge_verified, initiator, target.policy,
        trust_store, status_lists, now, nsa_config,
    )

    logs: list[str] = []
    if log_a:
        logs.append(b_id.urn)
    if log_b:
        logs.append(a_id.urn)

    return HandshakeOutcome(
        established=(
            ab.state is HandshakeState.ESTABLISHED and ba.state is HandshakeState.ESTABLISHED
        ),
        initiator_session=ab,
        target_session=ba,
        policy_logs=tuple(logs),
    )
