"""Brute-force discovery oracle.

A deliberately naive linear scan with every predicate re-written from the
documented behavior. It consumes queries in plain dict form and never
imports the discovery engine or the zero-trust package: if this module and
the engine ever disagree, the build fails, and that only means something
while their code stays disjoint.
"""

from __future__ import annotations

from functools import cmp_to_key

_DAY = 86_400
_NSA_MIN_AGE_DAYS = 30
_NSA_MIN_ATTESTATIONS = 2


def _prefix_match(capability: str, prefix: str) -> bool:
    want = prefix.split(".")
    have = capability.split(".")
    return len(have) >= len(want) and have[: len(want)] == want


def _lower_median(scores: list[int]):
    if not scores:
        return None
    ordered = sorted(scores)
    return ordered[(len(ordered) + 1) // 2 - 1]


def _agent_view(universe, urn: str) -> dict:
    """Everything the filter needs about one agent, from ground-truth data."""
    fixture = universe.agents[urn]
    doc = universe.registry.get(fixture.doc.agent_id)
    claims = universe.valid_claims.get(urn, [])
    flags = set(doc.content_flags)
    certs = set()
    scores = []
    for claim in claims:
        kind = claim.claim_type.value
        if kind == "CONTENT_FLAG_ATTESTATION":
            for flag in claim.body.get("flags", []):
                flags.add(str(flag))
        elif kind == "TRUST_CERTIFICATION":
            certs.add(str(claim.body["certification"]))
        elif kind == "REPUTATION_SCORE":
            scores.append(int(claim.body["score"]))
    return {
        "urn": urn,
        "status": doc.status.value,
        "capabilities": list(doc.capabilities),
        "flags": flags,
        "certs": certs,
        "reputation": _lower_median(scores),
        "regions": set(doc.regions),
        "registered_at": doc.registered_at,
        "claim_count": len(claims),
        "has_reputation": bool(scores),
    }


def _tier(view: dict, now: int) -> str:
    age_days = (now - view["registered_at"]) // _DAY
    if age_days < _NSA_MIN_AGE_DAYS or view["claim_count"] < _NSA_MIN_ATTESTATIONS:
        return "QUARANTINE"
    if not view["has_reputation"]:
        return "LIMITED"
    return "FULL"


def _passes(view: dict, query: dict, now: int) -> bool:
    if view["status"] != "ACTIVE":
        return False
    if query["capability"] is not None:
        hit = False
        for capability in view["capabilities"]:
            if _prefix_match(capability, query["capability"]):
                hit = True
        if not hit:
            return False
    for flag in query["exclude_flags"]:
        if flag in view["flags"]:
            return False
    for cert in query["requires_cert"]:
        if cert not in view["certs"]:
            return False
    if query["min_reputation"] is not None:
        if view["reputation"] is None:
            return False
        if view["reputation"] < query["min_reputation"]:
            return False
    if query["regions"] is not None:
        if not any(region in view["regions"] for region in query["regions"]):
            return False
    if not query["include_nsa"] and _tier(view, now) == "QUARANTINE":
        return False
    return True


def _compare(a: dict, b: dict) -> int:
    ra, rb = a["reputation"], b["reputation"]
    if (ra is None) != (rb is None):
        return 1 if ra is None else -1
    if ra is not None and ra != rb:
        return -1 if ra > rb else 1
    if a["registered_at"] != b["registered_at"]:
        return -1 if a["registered_at"] < b["registered_at"] else 1
    if a["urn"] != b["urn"]:
        return -1 if a["urn"] < b["urn"] else 1
    return 0


def brute_force_search(universe, query: dict) -> list[str]:
    """Ground-truth result list (agent urns, ranked and truncated)."""
    views = [_agent_view(universe, urn) for urn in sorted(universe.agents)]
    hits = [v for v in views if _passes(v, query, universe.now)]
    hits.sort(key=cmp_to_key(_compare))
    return [v["urn"] for v in hits[: query["limit"]]]
