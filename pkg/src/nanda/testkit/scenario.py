"""Seeded universe generation.

``generate`` builds a complete world (trust zones, issuers, agents, signed
claims, status lists, queries) from one 64-bit seed: same seed, same universe,
byte for byte. Adversary toggles plant labeled bad artifacts so tests can
assert ground truth rather than re-derive it:

  spoofed_claims   claims that must NOT verify VALID (forged signature or
                   unknown issuer), labeled with the expected verdict
  revoked_claims   claims whose status bit is set, labeled REVOKED
  sybil_batch      a batch of distinct agent ids controlled by one key
  replayed_nonces  handled by handshake fixtures (stale signatures), flagged
                   here so scenarios can be pinned in files
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from random import Random
from typing import Optional

from nanda.agentfacts.ids import AgentId, did_for_public_key
from nanda.agentfacts.model import (
    AgentFactsDoc,
    AgentStatus,
    EndpointDescriptor,
    EndpointProtocol,
)
from nanda.credentials.claims import (
    ClaimType,
    StatusRef,
    VerifiableClaim,
    Verdict,
    sign_claim,
    verify_claim,
)
from nanda.credentials.keys import SigningKey, keypair_from_seed
from nanda.credentials.status_list import StatusListStore, new_status_list, revoke
from nanda.credentials.trust import IssuerEntry, IssuerRole, TrustStore, TrustZone
from nanda.index_core.clock import FixedClock
from nanda.index_core.registry import Registry

CAPABILITY_POOL = (
    "education.tutoring",
    "education.k12.math",
    "education.language",
    "finance.advice",
    "finance.payments",
    "travel.booking",
    "travel.planning",
    "health.scheduling",
    "retail.inventory",
    "media.news",
)
FLAG_POOL = ("political", "adult_content", "financial_advice", "gambling", "user_generated")
CERT_POOL = ("kid-safe-cert-v1", "hipaa-compliant-v2", "soc2-audited", "edu-verified")
REGION_POOL = ("US", "DE", "FR", "JP", "BR", "IN", "GB", "CA", "KP", "IR")
DAY = 86_400


@dataclass(frozen=True)
class Scenario:
    seed: int
    agent_count: int = 50
    issuer_count: int = 3
    query_count: int = 20
    spoofed_claims: bool = False
    revoked_claims: bool = False
    replayed_nonces: bool = False
    sybil_batch: bool = False

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "agent_count": self.agent_count,
            "issuer_count": self.issuer_count,
            "query_count": self.query_count,
            "adversary": {
                "spoofed_claims": self.spoofed_claims,
                "revoked_claims": self.revoked_claims,
                "replayed_nonces": self.replayed_nonces,
                "sybil_batch": self.sybil_batch,
            },
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "Scenario":
        adversary = body.get("adversary", {})
        return cls(
            seed=int(body["seed"]),
            agent_count=int(body.get("agent_count", 50)),
            issuer_count=int(body.get("issuer_count", 3)),
            query_count=int(body.get("query_count", 20)),
            spoofed_claims=bool(adversary.get("spoofed_claims", False)),
            revoked_claims=bool(adversary.get("revoked_claims", False)),
            replayed_nonces=bool(adversary.get("replayed_nonces", False)),
            sybil_batch=bool(adversary.get("sybil_batch", False)),
        )


@dataclass
class AgentFixture:
    doc: AgentFactsDoc
    key: SigningKey
    owner: str


@dataclass
class Universe:
    scenario: Scenario
    now: int
    clock: FixedClock
    registry: Registry
    trust_store: TrustStore
    status_lists: StatusListStore
    agents: dict[str, AgentFixture] = field(default_factory=dict)
    issuer_keys: dict[str, SigningKey] = field(default_factory=dict)
    queries: list[dict] = field(default_factory=list)
    # Ground-truth labels written at generation time.
    spoofed_claim_ids: dict[str, str] = field(default_factory=dict)  # claim_id -> verdict
    revoked_claim_ids: set[str] = field(default_factory=set)
    sybil_agents: list[str] = field(default_factory=list)
    sybil_key: Optional[SigningKey] = None
    # Upstream verification shared by engine and oracle alike.
    valid_claims: dict[str, list[VerifiableClaim]] = field(default_factory=dict)

    def docs(self) -> list[AgentFactsDoc]:
        return self.registry.list_docs()

    def refresh_valid_claims(self) -> None:
        """Recompute the VALID subset per agent (e.g. after a revocation)."""
        self.valid_claims = {
            urn: [
                c
                for c in fixture.doc.claims
                if verify_claim(c, self.trust_store, self.status_lists, self.now)
                is Verdict.VALID
            ]
            for urn, fixture in self.agents.items()
        }


def _rng_key(rng: Random) -> SigningKey:
    return keypair_from_seed(rng.getrandbits(256).to_bytes(32, "big"))


def _rng_uuid(rng: Random) -> str:
    return str(uuid.UUID(int=rng.getrandbits(128)))


def generate(scenario: Scenario) -> Universe:
    rng = Random(scenario.seed)
    now = 1_750_000_000
    clock = FixedClock(now)

    # -- trust world ------------------------------------------------------------
    store = TrustStore(local_zone_id="home")
    issuer_keys: dict[str, SigningKey] = {}
    entries: list[IssuerEntry] = []
    for i in range(max(1, scenario.issuer_count)):
        key = _rng_key(rng)
        did = did_for_public_key(key.public_bytes)
        roles = {IssuerRole.CERTIFIER, IssuerRole.AUDITOR} if i else {IssuerRole.REGISTRAR,
                                                                      IssuerRole.CERTIFIER,
                                                                      IssuerRole.AUDITOR}
        entries.append(IssuerEntry(did=did, public_key=key.public_bytes, roles=frozenset(roles)))
        issuer_keys[str(did)] = key
    zone = TrustZone(zone_id="home", root_did=entries[0].did, issuers=tuple(entries))
    store.add_zone(zone)

    status_lists = StatusListStore()
    for entry in entries:
        status_lists.put(
            new_status_list(entry.did, "main", issuer_keys[str(entry.did)], now=now, size_bits=1024)
        )

    universe = Universe(
        scenario=scenario,
        now=now,
        clock=clock,
        registry=Registry(clock=clock),
        trust_store=store,
        status_lists=status_lists,
        issuer_keys=issuer_keys,
    )

    # -- agents -------------------------------------------------------------------
    sybil_size = min(6, scenario.agent_count) if scenario.sybil_batch else 0
    next_status_index: dict[str, int] = {str(e.did): 0 for e in entries}

    for i in range(scenario.agent_count):
        in_sybil_batch = i < sybil_size
        key = universe.sybil_key if in_sybil_batch and universe.sybil_key else _rng_key(rng)
        if in_sybil_batch and universe.sybil_key is None:
            universe.sybil_key = key
        agent_id = AgentId(zone="net", name=f"agent-{i:03d}")
        owner = f"owner-{rng.randrange(8)}"
        age_days = rng.randrange(0, 400)
        registered_at = now - age_days * DAY

        capabilities = tuple(sorted(rng.sample(CAPABILITY_POOL, rng.randint(1, 3))))
        flags = tuple(sorted(rng.sample(FLAG_POOL, rng.randint(0, 2))))
        regions = tuple(sorted(rng.sample(REGION_POOL, rng.randint(0, 3))))

        claims: list[VerifiableClaim] = []
        for _ in range(rng.randint(0, 4)):
            entry = rng.choice(entries)
            issuer_key = issuer_keys[str(entry.did)]
            index = next_status_index[str(entry.did)]
            next_status_index[str(entry.did)] += 1
            claim_type = rng.choice(list(ClaimType))
            if claim_type is ClaimType.TRUST_CERTIFICATION:
                body = {"certification": rng.choice(CERT_POOL)}
            elif claim_type is ClaimType.REPUTATION_SCORE:
                body = {"score": rng.randrange(0, 101), "metric": "overall"}
            elif claim_type is ClaimType.CAPABILITY_ATTESTATION:
                body = {"capability": rng.choice(capabilities)}
            else:
                body = {"flags": sorted(rng.sample(FLAG_POOL, rng.randint(1, 2)))}
            claim = sign_claim(
                claim_id=_rng_uuid(rng),
                subject=agent_id,
                claim_type=claim_type,
                body=body,
                issuer=entry.did,
                issued_at=registered_at,
                status_ref=StatusRef(list_id="main", index=index),
                issuer_key=issuer_key,
                trust_store=store,
            )

            if scenario.spoofed_claims and rng.random() < 0.25:
                claim, expected = _spoof(claim, rng)
                universe.spoofed_claim_ids[claim.claim_id] = expected
            elif scenario.revoked_claims and rng.random() < 0.25:
                current = status_lists.get(entry.did, "main")
                status_lists.put(revoke(current, index, issuer_key, now=now))
                universe.revoked_claim_ids.add(claim.claim_id)
            claims.append(claim)

        doc = AgentFactsDoc(
            agent_id=agent_id,
            did=did_for_public_key(key.public_bytes),
            owner=owner,
            endpoints=(
                EndpointDescriptor(
                    protocol=rng.choice(list(EndpointProtocol)),
                    url=f"https://{agent_id.name}.net.example/api",
                    priority=0,
                ),
            ),
            capabilities=capabilities,
            content_flags=flags,
            regions=regions,
            claims=tuple(claims),
            registered_at=registered_at,
            status=AgentStatus.ACTIVE,
            version=1,
        )

        clock.set(registered_at)
        universe.registry.register(doc, owner)
        stored = universe.registry.get(agent_id)
        universe.agents[agent_id.urn] = AgentFixture(doc=stored, key=key, owner=owner)
        if in_sybil_batch:
            universe.sybil_agents.append(agent_id.urn)

    clock.set(now)

    # A slice of paused agents keeps status filtering honest.
    from nanda.avc.ledger import AvcLedger, ControlAction

    ledger = AvcLedger(universe.registry, id_source=lambda: _rng_uuid(rng))
    urns = sorted(universe.agents)
    for urn in urns[:: max(1, len(urns) // 10)][:3]:
        fixture = universe.agents[urn]
        ledger.control(fixture.doc.agent_id, ControlAction.PAUSE, fixture.owner)
        universe.agents[urn].doc = universe.registry.get(fixture.doc.agent_id)

    universe.refresh_valid_claims()

    # -- queries (canonical dict form; the oracle never sees engine types) -------
    for _ in range(scenario.query_count):
        universe.queries.append(_random_query(rng))

    return universe


def _spoof(claim: VerifiableClaim, rng: Random) -> tuple[VerifiableClaim, str]:
    """Damage a claim so it must not verify, returning the expected verdict."""
    if rng.random() < 0.5:
        sig = bytearray(claim.signature)
        sig[rng.randrange(len(sig))] ^= 1 << rng.randrange(8)
        damaged = VerifiableClaim(
            claim_id=claim.claim_id,
            subject=claim.subject,
            claim_type=claim.claim_type,
            body=claim.body,
            issuer=claim.issuer,
            issued_at=claim.issued_at,
            status_ref=claim.status_ref,
            signature=bytes(sig),
        )
        return damaged, "INVALID_SIGNATURE"
    rogue = keypair_from_seed(rng.getrandbits(256).to_bytes(32, "big"))
    forged = VerifiableClaim(
        claim_id=claim.claim_id,
        subject=claim.subject,
        claim_type=claim.claim_type,
        body=claim.body,
        issuer=did_for_public_key(rogue.public_bytes),
        issued_at=claim.issued_at,
        status_ref=claim.status_ref,
        signature=b"",
    )
    from nanda.agentfacts.canonical import canonicalize

    signature = rogue.sign(canonicalize(forged.signing_body()))
    signed = VerifiableClaim(
        claim_id=forged.claim_id,
        subject=forged.subject,
        claim_type=forged.claim_type,
        body=forged.body,
        issuer=forged.issuer,
        issued_at=forged.issued_at,
        status_ref=forged.status_ref,
        signature=signature,
    )
    return signed, "UNKNOWN_ISSUER"


def _random_query(rng: Random) -> dict:
    query: dict = {
        "capability": None,
        "exclude_flags": [],
        "requires_cert": [],
        "min_reputation": None,
        "regions": None,
        "include_nsa": False,
        "limit": 50,
    }
    if rng.random() < 0.6:
        capability = rng.choice(CAPABILITY_POOL)
        if rng.random() < 0.4:
            segments = capability.split(".")
            capability = ".".join(segments[: rng.randint(1, len(segments))])
        query["capability"] = capability
    if rng.random() < 0.5:
        query["exclude_flags"] = sorted(rng.sample(FLAG_POOL, rng.randint(1, 2)))
    if rng.random() < 0.4:
        query["requires_cert"] = sorted(rng.sample(CERT_POOL, rng.randint(1, 2)))
    if rng.random() < 0.4:
        query["min_reputation"] = rng.randrange(0, 101)
    if rng.random() < 0.3:
        query["regions"] = sorted(rng.sample(REGION_POOL, rng.randint(1, 3)))
    if rng.random() < 0.25:
        query["include_nsa"] = True
    if rng.random() < 0.3:
        query["limit"] = rng.randint(1, 500)
    return query
