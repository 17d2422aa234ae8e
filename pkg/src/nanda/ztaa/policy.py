"""Collaboration policy evaluation.

A policy is the initiator's firewall: category allow-list, content-flag and
jurisdiction deny-lists, reputation floor, required certifications, and the
newly-seen-agent rule. Evaluation is a pure conjunction over pre-verified
claims; DENY carries every reason that fired so a rejection is explainable.

``max_chain_zones`` caps how much cross-zone trust the policy accepts; the
handshake driver filters claims by their issuer's chain depth before calling
in here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from nanda.agentfacts.model import AgentFactsDoc
from nanda.credentials.claims import (
    VerifiableClaim,
    attested_flags,
    certification_names,
)
from nanda.safesearch.scoring import aggregate_reputation, capability_matches
from nanda.ztaa.nsa import NsaAssessment, NsaTier

DENY_CATEGORY_NOT_ALLOWED = "CATEGORY_NOT_ALLOWED"
DENY_FLAG_DENIED = "FLAG_DENIED"
DENY_REGION_DENIED = "REGION_DENIED"
DENY_REPUTATION_UNKNOWN = "REPUTATION_UNKNOWN"
DENY_REPUTATION_BELOW_MIN = "REPUTATION_BELOW_MIN"
DENY_CERT_MISSING = "CERT_MISSING"
DENY_NSA_BLOCKED = "NSA_BLOCKED"


class NsaRule(str, Enum):
    BLOCK = "BLOCK"
    ALLOW_WITH_LOG = "ALLOW_WITH_LOG"


@dataclass(frozen=True)
class ZtaaPolicy:
    allowed_categories: frozenset[str] = frozenset()
    denied_flags: frozenset[str] = frozenset()
    min_reputation: Optional[int] = None
    denied_regions: frozenset[str] = frozenset()
    required_certs: frozenset[str] = frozenset()
    nsa_rule: NsaRule = NsaRule.BLOCK
    max_chain_zones: int = 2

    def to_json_dict(self) -> dict:
        return {
            "allowed_categories": sorted(self.allowed_categories),
            "denied_flags": sorted(self.denied_flags),
            "min_reputation": self.min_reputation,
            "denied_regions": sorted(self.denied_regions),
            "required_certs": sorted(self.required_certs),
            "nsa_rule": self.nsa_rule.value,
            "max_chain_zones": self.max_chain_zones,
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "ZtaaPolicy":
        return cls(
            allowed_categories=frozenset(body.get("allowed_categories", [])),
            denied_flags=frozenset(body.get("denied_flags", [])),
            min_reputation=body.get("min_reputation"),
            denied_regions=frozenset(body.get("denied_regions", [])),
            required_certs=frozenset(body.get("required_certs", [])),
            nsa_rule=NsaRule(body.get("nsa_rule", "BLOCK")),
            max_chain_zones=int(body.get("max_chain_zones", 2)),
        )


@dataclass(frozen=True)
class PolicyDecision:
    allow: bool
    reasons: tuple[str, ...] = ()
    log_required: bool = False

    def to_json_dict(self) -> dict:
        return {
            "allow": self.allow,
            "reasons": list(self.reasons),
            "log_required": self.log_required,
        }


def evaluate_policy(
    doc: AgentFactsDoc,
    valid_claims: list[VerifiableClaim],
    nsa: NsaAssessment,
    policy: ZtaaPolicy,
) -> PolicyDecision:
    reasons: list[str] = []

    if policy.allowed_categories:
        if not any(
            capability_matches(cap, prefix)
            for cap in doc.capabilities
            for prefix in policy.allowed_categories
        ):
            reasons.append(DENY_CATEGORY_NOT_ALLOWED)

    if policy.denied_flags:
        effective = set(doc.content_flags) | attested_flags(valid_claims)
        if effective & policy.denied_flags:
            reasons.append(DENY_FLAG_DENIED)

    if policy.denied_regions and set(doc.regions) & policy.denied_regions:
        reasons.append(DENY_REGION_DENIED)

    if policy.min_reputation is not None:
        reputation = aggregate_reputation(valid_claims)
        if reputation is None:
            reasons.append(DENY_REPUTATION_UNKNOWN)
        elif reputation < policy.min_reputation:
            reasons.append(DENY_REPUTATION_BELOW_MIN)

    if policy.required_certs and not policy.required_certs <= certification_names(valid_claims):
        reasons.append(DENY_CERT_MISSING)

    log_required = False
    if nsa.tier is NsaTier.QUARANTINE:
        if policy.nsa_rule is NsaRule.BLOCK:
            reasons.append(DENY_NSA_BLOCKED)
        else:
            log_required = True

    if reasons:
        return PolicyDecision(allow=False, reasons=tuple(reasons))
    return PolicyDecision(allow=True, log_required=log_required)
