"""Signed claims about agents: certifications, reputation scores, capability
and content-flag attestations.

The signature covers the canonical bytes of every field except the signature
itself (the active scheme id is part of the signed envelope). Verification
walks a fixed precedence so a claim always gets the same verdict for the
same inputs: unknown issuer, then untrusted zone, then bad signature, then
revocation, then VALID.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from nanda.agentfacts.canonical import canonicalize
from nanda.agentfacts.ids import AgentId, Did, parse_agent_id, parse_did
from nanda.credentials.keys import SCHEME, SigningKey, verify_signature
from nanda.credentials.status_list import StatusListStore
from nanda.credentials.trust import IssuerRole, TrustStore, check_cross_trust
from nanda.errors import DomainError

UNAUTHORIZED_ROLE = "UNAUTHORIZED_ROLE"
KEY_UNKNOWN = "KEY_UNKNOWN"


class ClaimType(str, Enum):
    TRUST_CERTIFICATION = "TRUST_CERTIFICATION"
    REPUTATION_SCORE = "REPUTATION_SCORE"
    CAPABILITY_ATTESTATION = "CAPABILITY_ATTESTATION"
    CONTENT_FLAG_ATTESTATION = "CONTENT_FLAG_ATTESTATION"


class Verdict(str, Enum):
    VALID = "VALID"
    INVALID_SIGNATURE = "INVALID_SIGNATURE"
    UNKNOWN_ISSUER = "UNKNOWN_ISSUER"
    UNTRUSTED_ZONE = "UNTRUSTED_ZONE"
    REVOKED = "REVOKED"


# Who may mint what. Flag attestations are accepted from either reviewing
# role; registrars vouch for registrations, not content, so they mint nothing.
_REQUIRED_ROLES: dict[ClaimType, frozenset[IssuerRole]] = {
    ClaimType.TRUST_CERTIFICATION: frozenset({IssuerRole.CERTIFIER}),
    ClaimType.REPUTATION_SCORE: frozenset({IssuerRole.AUDITOR}),
    ClaimType.CAPABILITY_ATTESTATION: frozenset({IssuerRole.CERTIFIER}),
    ClaimType.CONTENT_FLAG_ATTESTATION: frozenset({IssuerRole.CERTIFIER, IssuerRole.AUDITOR}),
}


@dataclass(frozen=True)
class StatusRef:
    list_id: str
    index: int

    def to_json_dict(self) -> dict:
        return {"list_id": self.list_id, "index": self.index}


@dataclass(frozen=True)
class VerifiableClaim:
    claim_id: str
    subject: AgentId
    claim_type: ClaimType
    body: dict
    issuer: Did
    issued_at: int
    status_ref: StatusRef
    signature: bytes
    scheme: str = SCHEME

    def signing_body(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "subject": self.subject.urn,
            "claim_type": self.claim_type.value,
            "body": self.body,
            "issuer": str(self.issuer),
            "issued_at": self.issued_at,
            "status_ref": self.status_ref.to_json_dict(),
            "scheme": self.scheme,
        }

    def to_json_dict(self) -> dict:
        envelope = self.signing_body()
        envelope["signature"] = base64.b64encode(self.signature).decode("ascii")
        return envelope

    @classmethod
    def from_json_dict(cls, body: dict) -> "VerifiableClaim":
        try:
            return cls(
                claim_id=str(body["claim_id"]),
                subject=parse_agent_id(str(body["subject"])),
                claim_type=ClaimType(body["claim_type"]),
                body=dict(body["body"]),
                issuer=parse_did(str(body["issuer"])),
                issued_at=int(body["issued_at"]),
                status_ref=StatusRef(
                    list_id=str(body["status_ref"]["list_id"]),
                    index=int(body["status_ref"]["index"]),
                ),
                signature=base64.b64decode(body["signature"]),
                scheme=str(body.get("scheme", SCHEME)),
            )
        except DomainError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError("INVALID_CLAIM", f"bad claim envelope: {exc}") from exc


def certification_body(name: str) -> dict:
    return {"certification": name}


def reputation_body(score: int, metric: str = "overall") -> dict:
    if not 0 <= score <= 100:
        raise DomainError("BAD_VALUE", "reputation score must be in [0, 100]")
    return {"score": score, "metric": metric}


def capability_body(capability: str) -> dict:
    return {"capability": capability}


def content_flags_body(flags: set[str]) -> dict:
    return {"flags": sorted(flags)}


def sign_claim(
    *,
    claim_id: str,
    subject: AgentId,
    claim_type: ClaimType,
    body: dict,
    issuer: Did,
    issued_at: int,
    status_ref: StatusRef,
    issuer_key: SigningKey,
    trust_store: TrustStore,
) -> VerifiableClaim:
    """Mint a claim, enforcing issuer registration and role authorization."""
    found = trust_store.find_issuer(issuer)
    if found is None:
        raise DomainError(KEY_UNKNOWN, f"issuer {issuer} is not in the trust store")
    _, entry = found
    if entry.public_key != issuer_key.public_bytes:
        raise DomainError(KEY_UNKNOWN, f"key does not match the registered key for {issuer}")
    if not entry.roles & _REQUIRED_ROLES[claim_type]:
        allowed = "/".join(sorted(r.value for r in _REQUIRED_ROLES[claim_type]))
        raise DomainError(
            UNAUTHORIZED_ROLE,
            f"{claim_type.value} requires role {allowed}",
        )
    unsigned = VerifiableClaim(
        claim_id=claim_id,
        subject=subject,
        claim_type=claim_type,
        body=body,
        issuer=issuer,
        issued_at=issued_at,
        status_ref=status_ref,
        signature=b"",
    )
    signature = issuer_key.sign(canonicalize(unsigned.signing_body()))
    return VerifiableClaim(
        claim_id=unsigned.claim_id,
        subject=unsigned.subject,
        claim_type=unsigned.claim_type,
        body=unsigned.body,
        issuer=unsigned.issuer,
        issued_at=unsigned.issued_at,
        status_ref=unsigned.status_ref,
        signature=signature,
    )


def verify_claim(
    claim: VerifiableClaim,
    trust_store: TrustStore,
    status_lists: StatusListStore,
    now: int,
) -> Verdict:
    """Verdict for *claim* from the local zone's point of view.

    ``now`` is part of the contract for symmetry with future expiry support;
    claims currently carry no lifetime, so revocation is the only
    time-varying input.
    """
    found = trust_store.find_issuer(claim.issuer)
    if found is None:
        return Verdict.UNKNOWN_ISSUER
    zone_id, entry = found
    if not check_cross_trust(trust_store.local_zone_id, zone_id, trust_store):
        return Verdict.UNTRUSTED_ZONE
    message = canonicalize(claim.signing_body())
    if claim.scheme != SCHEME or not verify_signature(entry.public_key, message, claim.signature):
        return Verdict.INVALID_SIGNATURE
    status_list = status_lists.get(claim.issuer, claim.status_ref.list_id)
    if status_list is not None and status_list.is_revoked(claim.status_ref.index):
        return Verdict.REVOKED
    return Verdict.VALID


ClaimOrVerdict = Union[VerifiableClaim, Verdict]


def valid_claims(
    claims: tuple[VerifiableClaim, ...],
    trust_store: TrustStore,
    status_lists: StatusListStore,
    now: int,
) -> list[VerifiableClaim]:
    return [
        c for c in claims if verify_claim(c, trust_store, status_lists, now) is Verdict.VALID
    ]


def verdicts_for(
    claims: tuple[VerifiableClaim, ...],
    trust_store: TrustStore,
    status_lists: StatusListStore,
    now: int,
) -> dict[str, Verdict]:
    return {c.claim_id: verify_claim(c, trust_store, status_lists, now) for c in claims}


def reputation_scores(claims: list[VerifiableClaim]) -> list[int]:
    """Scores carried by REPUTATION_SCORE claims, in claim order."""
    out: list[int] = []
    for claim in claims:
        if claim.claim_type is ClaimType.REPUTATION_SCORE:
            out.append(int(claim.body["score"]))
    return out


def certification_names(claims: list[VerifiableClaim]) -> set[str]:
    return {
        str(c.body["certification"])
        for c in claims
        if c.claim_type is ClaimType.TRUST_CERTIFICATION
    }


def attested_flags(claims: list[VerifiableClaim]) -> set[str]:
    flags: set[str] = set()
    for claim in claims:
        if claim.claim_type is ClaimType.CONTENT_FLAG_ATTESTATION:
            flags.update(str(f) for f in claim.body.get("flags", []))
    return flags


def attested_capabilities(claims: list[VerifiableClaim]) -> set[str]:
    return {
        str(c.body["capability"])
        for c in claims
        if c.claim_type is ClaimType.CAPABILITY_ATTESTATION
    }


def status_ref_unique(claims: list[VerifiableClaim]) -> Optional[tuple[str, str, int]]:
    """First duplicated (issuer, list_id, index) triple, if any."""
    seen: set[tuple[str, str, int]] = set()
    for claim in claims:
        key = (str(claim.issuer), claim.status_ref.list_id, claim.status_ref.index)
        if key in seen:
            return key
        seen.add(key)
    return None
