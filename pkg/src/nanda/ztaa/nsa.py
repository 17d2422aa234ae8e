"""Newly-seen-agent risk tiers.

A young or thinly-attested agent has not earned trust yet:

  QUARANTINE  age < min_age_days  OR  valid attestations < min_attestations
  LIMITED     past quarantine but no valid reputation score at all
  FULL        otherwise

Thresholds default to 30 days / 2 attestations and come from deployment
config. Every VALID claim counts as an attestation, whatever its type.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from nanda.agentfacts.model import AgentFactsDoc
from nanda.credentials.claims import ClaimType, VerifiableClaim
from nanda.errors import DomainError

CLOCK_SKEW = "CLOCK_SKEW"

SECONDS_PER_DAY = 86_400


class NsaTier(str, Enum):
    QUARANTINE = "QUARANTINE"
    LIMITED = "LIMITED"
    FULL = "FULL"


@dataclass(frozen=True)
class NsaConfig:
    min_age_days: int = 30
    min_attestations: int = 2


@dataclass(frozen=True)
class NsaAssessment:
    tier: NsaTier
    age_days: int
    valid_attestation_count: int

    def to_json_dict(self) -> dict:
        return {
            "tier": self.tier.value,
            "age_days": self.age_days,
            "valid_attestation_count": self.valid_attestation_count,
        }


def assess_nsa(
    doc: AgentFactsDoc,
    valid_claims: list[VerifiableClaim],
    now: int,
    config: NsaConfig = NsaConfig(),
) -> NsaAssessment:
    if doc.registered_at > now:
        raise DomainError(CLOCK_SKEW, "agent registered in the future")
    age_days = (now - doc.registered_at) // SECONDS_PER_DAY
    count = len(valid_claims)
    if age_days < config.min_age_days or count < config.min_attestations:
        tier = NsaTier.QUARANTINE
    elif not any(c.claim_type is ClaimType.REPUTATION_SCORE for c in valid_claims):
        tier = NsaTier.LIMITED
    else:
        tier = NsaTier.FULL
    return NsaAssessment(tier=tier, age_days=age_days, valid_attestation_count=count)
