"""Handshake state-space exploration.

Enumerates every driver behavior over the six protocol event kinds: a fixed
fixture instantiates one honest event per kind (valid resolution, clean
verdicts, a correctly signed challenge response, a positive peer
confirmation, an allowing policy verdict), and the explorer throws them at a
session in every possible order. Out-of-order events bounce off as
ILLEGAL_EVENT and the sequence continues, which models a confused or
adversarial driver rather than a crashing one.

The safety property checked downstream: no ordering reaches ESTABLISHED
without TARGET_FACTS_VERIFIED, MUTUALLY_AUTHENTICATED, and POLICY_CLEARED
appearing in the transcript, in that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Callable, Iterator, Optional

from nanda.agentfacts.ids import AgentId, did_for_public_key
from nanda.credentials.claims import Verdict
from nanda.credentials.keys import keypair_from_seed
from nanda.errors import DomainError
from nanda.ztaa.handshake import (
    ChallengeResponse,
    FactsVerdict,
    HandshakeSession,
    HandshakeState,
    PeerVerifiedUs,
    PolicyVerdict,
    ResolveFail,
    ResolveOk,
    TERMINAL_STATES,
    challenge_message,
    new_session,
    step,
)
from nanda.ztaa.policy import PolicyDecision

_REQUIRED_PATH = (
    HandshakeState.TARGET_FACTS_VERIFIED,
    HandshakeState.MUTUALLY_AUTHENTICATED,
    HandshakeState.POLICY_CLEARED,
)


@dataclass(frozen=True)
class EventFixture:
    """One honest instance of each protocol event kind, bound to one
    (initiator, target, nonce) triple."""

    initiator: AgentId
    target: AgentId
    nonce_i: bytes
    events: tuple

    def fresh_session(self) -> HandshakeSession:
        return new_session(
            self.initiator, self.target, nonce_i=self.nonce_i, nonce_t=bytes(32)
        )


def build_fixture(seed: int = 0) -> EventFixture:
    initiator = AgentId(zone="probe", name="alpha")
    target = AgentId(zone="probe", name="beta")
    target_key = keypair_from_seed(seed.to_bytes(4, "big") * 8)
    nonce_i = bytes([seed % 256]) * 32
    resolution = {
        "agent_id": target.urn,
        "did": str(did_for_public_key(target_key.public_bytes)),
        "endpoints": [],
        "status": "ACTIVE",
    }
    signature = target_key.sign(challenge_message(nonce_i, initiator, target))
    events = (
        ResolveOk(resolution),
        ResolveFail("probe"),
        FactsVerdict(verdicts={"c1": Verdict.VALID}, policy_relevant=frozenset({"c1"})),
        ChallengeResponse(public_key=target_key.public_bytes, signature=signature),
        PeerVerifiedUs(confirmed=True),
        PolicyVerdict(decision=PolicyDecision(allow=True)),
    )
    return EventFixture(initiator=initiator, target=target, nonce_i=nonce_i, events=events)


def run_sequence(fixture: EventFixture, sequence: tuple[int, ...]) -> HandshakeSession:
    """Apply an event-index sequence; illegal events are discarded."""
    session = fixture.fresh_session()
    for index in sequence:
        if session.state in TERMINAL_STATES:
            break
        try:
            session = step(session, fixture.events[index], now=0)
        except DomainError as err:
            if err.code != "ILLEGAL_EVENT":
                raise
    return session


def established_path_ok(session: HandshakeSession) -> bool:
    """True unless the session is ESTABLISHED without the mandatory states
    in order."""
    if session.state is not HandshakeState.ESTABLISHED:
        return True
    positions = []
    order = [entry.to_state for entry in session.transcript]
    for required in _REQUIRED_PATH:
        if required not in order:
            return False
        positions.append(order.index(required))
    return positions == sorted(positions) and positions[-1] < order.index(
        HandshakeState.ESTABLISHED
    )


def explore_all_sequences(
    fixture: EventFixture,
    max_length: int,
    on_terminal: Callable[[tuple[int, ...], HandshakeSession], None],
) -> int:
    """Depth-first sweep of all event sequences up to *max_length*.

    Shares prefixes (each tree node costs one ``step``), so the full
    6**max_length sequence space is covered in ~6**max_length / 5 steps.
    Returns the number of sequences examined (leaves).
    """
    kinds = len(fixture.events)
    leaves = 0

    def descend(session: HandshakeSession, prefix: tuple[int, ...]) -> None:
        nonlocal leaves
        if len(prefix) == max_length or session.state in TERMINAL_STATES:
            # A terminal session ignores further events, so all
            # kinds**(max_length - len(prefix)) extensions of this prefix
            # behave identically and are covered by this one check.
            leaves += kinds ** (max_length - len(prefix))
            on_terminal(prefix, session)
            return
        for index in range(kinds):
            try:
                successor = step(session, fixture.events[index], now=0)
            except DomainError as err:
                if err.code != "ILLEGAL_EVENT":
                    raise
                successor = session
            descend(successor, prefix + (index,))

    descend(fixture.fresh_session(), ())
    return leaves


def random_traces(
    fixture: EventFixture, *, count: int, length: int, seed: int
) -> Iterator[HandshakeSession]:
    rng = Random(seed)
    kinds = len(fixture.events)
    for _ in range(count):
        sequence = tuple(rng.randrange(kinds) for _ in range(length))
        yield run_sequence(fixture, sequence)
