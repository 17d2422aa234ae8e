"""The discovery filter and ranking engine.

An agent matches a query only if every stated criterion holds; there are no
optimistic defaults. In particular an agent with no valid reputation claims
fails *any* min_reputation filter, and quarantined newly-seen agents are
invisible unless the query opts in.

Claim verification happens upstream: callers pass only the claims that
verified VALID against the deployment's trust store and status lists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from nanda.agentfacts.model import AgentFactsDoc, AgentStatus
from nanda.credentials.claims import (
    VerifiableClaim,
    attested_flags,
    certification_names,
)
from nanda.safesearch.query import SearchQuery
from nanda.safesearch.scoring import aggregate_reputation, capability_matches
from nanda.ztaa.nsa import NsaConfig, NsaTier, assess_nsa

REASON_STATUS_NOT_ACTIVE = "STATUS_NOT_ACTIVE"
REASON_CAPABILITY_MISMATCH = "CAPABILITY_MISMATCH"
REASON_FLAG_EXCLUDED = "FLAG_EXCLUDED"
REASON_CERT_MISSING = "CERT_MISSING"
REASON_REPUTATION_UNKNOWN = "REPUTATION_UNKNOWN"
REASON_REPUTATION_BELOW_MIN = "REPUTATION_BELOW_MIN"
REASON_REGION_MISMATCH = "REGION_MISMATCH"
REASON_NSA_EXCLUDED = "NSA_EXCLUDED"


def matches(
    doc: AgentFactsDoc,
    valid_claims: list[VerifiableClaim],
    query: SearchQuery,
    now: int,
    *,
    nsa_config: NsaConfig = NsaConfig(),
) -> tuple[bool, list[str]]:
    """Whether *doc* satisfies every criterion, with the reasons it does not."""
    reasons: list[str] = []

    if doc.status is not AgentStatus.ACTIVE:
        reasons.append(REASON_STATUS_NOT_ACTIVE)

    if query.capability is not None:
        if not any(capability_matches(c, query.capability) for c in doc.capabilities):
            reasons.append(REASON_CAPABILITY_MISMATCH)

    if query.exclude_flags:
        effective = set(doc.content_flags) | attested_flags(valid_claims)
        if effective & query.exclude_flags:
            reasons.append(REASON_FLAG_EXCLUDED)

    if query.requires_cert:
        held = certification_names(valid_claims)
        if not query.requires_cert <= held:
            reasons.append(REASON_CERT_MISSING)

    if query.min_reputation is not None:
        reputation = aggregate_reputation(valid_claims)
        if reputation is None:
            reasons.append(REASON_REPUTATION_UNKNOWN)
        elif reputation < query.min_reputation:
            reasons.append(REASON_REPUTATION_BELOW_MIN)

    if query.regions is not None:
        if not set(doc.regions) & query.regions:
            reasons.append(REASON_REGION_MISMATCH)

    if not query.include_nsa:
        tier = assess_nsa(doc, valid_claims, now, nsa_config).tier
        if tier is NsaTier.QUARANTINE:
            reasons.append(REASON_NSA_EXCLUDED)

    return not reasons, reasons


@dataclass(frozen=True)
class RankedResult:
    agent_id: str
    aggregated_reputation: Optional[int]
    matched_certs: frozenset[str]
    nsa_tier: NsaTier
    registered_at: int
    components: dict

    def to_json_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "aggregated_reputation": self.aggregated_reputation,
            "matched_certs": sorted(self.matched_certs),
            "nsa_tier": self.nsa_tier.value,
            "registered_at": self.registered_at,
            "components": self.components,
        }


def _sort_key(result: RankedResult):
    return (
        result.aggregated_reputation is None,
        -(result.aggregated_reputation or 0),
        result.registered_at,
        result.agent_id,
    )


def rank(results: list[RankedResult], limit: int) -> list[RankedResult]:
    """Total order: reputation desc (absent last), oldest first, then name.

    The specific order is a documented convention, not a quality judgement;
    clients wanting another order can re-sort. Determinism is the contract.
    """
    return sorted(results, key=_sort_key)[:limit]


def run_search(
    docs: Iterable[AgentFactsDoc],
    query: SearchQuery,
    valid_claims_by_agent: dict[str, list[VerifiableClaim]],
    now: int,
    *,
    nsa_config: NsaConfig = NsaConfig(),
    collect_exclusions: bool = False,
) -> tuple[list[RankedResult], list[dict]]:
    """Filter + rank over a registry snapshot.

    Returns (ranked results truncated to the query limit, exclusion
    diagnostics). Exclusions are only gathered when *collect_exclusions* is
    set (the ``explain=true`` path).
    """
    matched: list[RankedResult] = []
    excluded: list[dict] = []
    for doc in docs:
        claims = valid_claims_by_agent.get(doc.agent_id.urn, [])
        ok, reasons = matches(doc, claims, query, now, nsa_config=nsa_config)
        if not ok:
            if collect_exclusions:
                excluded.append({"agent_id": doc.agent_id.urn, "reasons": reasons})
            continue
        reputation = aggregate_reputation(claims)
        certs = certification_names(claims)
        assessment = assess_nsa(doc, claims, now, nsa_config)
        matched.append(
            RankedResult(
                agent_id=doc.agent_id.urn,
                aggregated_reputation=reputation,
                matched_certs=frozenset(certs & query.requires_cert),
                nsa_tier=assessment.tier,
                registered_at=doc.registered_at,
                components={
                    "reputation": reputation,
                    "registered_at": doc.registered_at,
                    "agent_id": doc.agent_id.urn,
                },
            )
        )
    return rank(matched, query.limit), excluded
