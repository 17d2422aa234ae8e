"""Scoring primitives shared by discovery filtering and policy evaluation."""

from __future__ import annotations

from typing import Optional

from nanda.credentials.claims import ClaimType, VerifiableClaim


def capability_matches(capability: str, prefix: str) -> bool:
    """Exact segment-prefix match on the dotted taxonomy.

    ``education`` matches ``education`` and ``education.tutoring`` but never
    ``educationx``.
    """
    return capability == prefix or capability.startswith(prefix + ".")


def aggregate_reputation(reputation_claims: list[VerifiableClaim]) -> Optional[int]:
    """Lower median of the valid reputation scores; None when there are none.

    The median resists a single rogue auditor in either direction.
    """
    scores = sorted(
        int(c.body["score"])
        for c in reputation_claims
        if c.claim_type is ClaimType.REPUTATION_SCORE
    )
    if not scores:
        return None
    mid = (len(scores) - 1) // 2
    return scores[mid]
