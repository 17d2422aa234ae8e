"""Trust zones, issuer registration, and cross-zone trust.

A zone is a named set of issuers; one of them (``root_did``) is the zone
root. A zone extends trust to another zone by having its root sign the other
zone's root key. Trust diffusion is deliberately bounded: a verifier in zone
A trusts an issuer in zone B iff A == B, A signed B directly, or A signed
some C that signed B. Chains longer than two hops never confer trust.

Zone files live in a directory, one ``<zone_id>.zone.json`` each, with keys
in base58 and signatures in base64.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from nanda.agentfacts.canonical import canonicalize
from nanda.agentfacts.encoding import b58decode, b58encode
from nanda.agentfacts.ids import Did, parse_did
from nanda.credentials.keys import SigningKey, verify_signature
from nanda.errors import DomainError

MAX_CROSS_CHAIN = 2


class IssuerRole(str, Enum):
    CERTIFIER = "CERTIFIER"
    AUDITOR = "AUDITOR"
    REGISTRAR = "REGISTRAR"


@dataclass(frozen=True)
class IssuerEntry:
    did: Did
    public_key: bytes
    roles: frozenset[IssuerRole]

    def to_json_dict(self) -> dict:
        return {
            "did": str(self.did),
            "public_key": b58encode(self.public_key),
            "roles": sorted(r.value for r in self.roles),
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "IssuerEntry":
        return cls(
            did=parse_did(body["did"]),
            public_key=b58decode(body["public_key"]),
            roles=frozenset(IssuerRole(r) for r in body["roles"]),
        )


@dataclass(frozen=True)
class CrossSignature:
    other_zone_id: str
    signature: bytes

    def to_json_dict(self) -> dict:
        return {
            "other_zone_id": self.other_zone_id,
            "signature": base64.b64encode(self.signature).decode("ascii"),
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "CrossSignature":
        return cls(
            other_zone_id=body["other_zone_id"],
            signature=base64.b64decode(body["signature"]),
        )


@dataclass(frozen=True)
class TrustZone:
    zone_id: str
    root_did: Did
    issuers: tuple[IssuerEntry, ...]
    cross_signatures: tuple[CrossSignature, ...] = ()

    def issuer(self, did: Did) -> Optional[IssuerEntry]:
        for entry in self.issuers:
            if entry.did == did:
                return entry
        return None

    def root_key(self) -> bytes:
        entry = self.issuer(self.root_did)
        if entry is None:
            raise DomainError("BAD_ZONE", f"zone {self.zone_id} has no issuer for its root DID")
        return entry.public_key

    def to_json_dict(self) -> dict:
        return {
            "zone_id": self.zone_id,
            "root_did": str(self.root_did),
            "issuers": [e.to_json_dict() for e in self.issuers],
            "cross_signatures": [c.to_json_dict() for c in self.cross_signatures],
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "TrustZone":
        return cls(
            zone_id=body["zone_id"],
            root_did=parse_did(body["root_did"]),
            issuers=tuple(IssuerEntry.from_json_dict(e) for e in body["issuers"]),
            cross_signatures=tuple(
                CrossSignature.from_json_dict(c) for c in body.get("cross_signatures", [])
            ),
        )


def cross_sign_message(from_zone: str, to_zone: str, to_root_key: bytes) -> bytes:
    return canonicalize(
        {
            "cross_sign": {
                "from_zone": from_zone,
                "to_zone": to_zone,
                "root_key": b58encode(to_root_key),
            }
        }
    )


def make_cross_signature(
    from_zone: TrustZone, to_zone: TrustZone, from_root_key: SigningKey
) -> CrossSignature:
    """Sign *to_zone*'s root key with *from_zone*'s root key."""
    if from_root_key.public_bytes != from_zone.root_key():
        raise DomainError("SIGNER_MISMATCH", "signing key is not the zone root")
    message = cross_sign_message(from_zone.zone_id, to_zone.zone_id, to_zone.root_key())
    return CrossSignature(other_zone_id=to_zone.zone_id, signature=from_root_key.sign(message))


@dataclass
class TrustStore:
    """All zones this deployment knows, plus the local verification anchor."""

    local_zone_id: str
    zones: dict[str, TrustZone] = field(default_factory=dict)

    def zone(self, zone_id: str) -> TrustZone:
        try:
            return self.zones[zone_id]
        except KeyError:
            raise DomainError("UNKNOWN_ZONE", f"no zone {zone_id!r} in the trust store") from None

    def add_zone(self, zone: TrustZone) -> None:
        self.zones[zone.zone_id] = zone

    def find_issuer(self, did: Did) -> Optional[tuple[str, IssuerEntry]]:
        for zone in self.zones.values():
            entry = zone.issuer(did)
            if entry is not None:
                return zone.zone_id, entry
        return None

    # -- persistence ---------------------------------------------------------

    def save(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        for zone in self.zones.values():
            path = directory / f"{zone.zone_id}.zone.json"
            path.write_text(
                json.dumps(zone.to_json_dict(), indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )

    @classmethod
    def load(cls, directory: Path, local_zone_id: str) -> "TrustStore":
        store = cls(local_zone_id=local_zone_id)
        for path in sorted(directory.glob("*.zone.json")):
            zone = TrustZone.from_json_dict(json.loads(path.read_text(encoding="utf-8")))
            store.add_zone(zone)
        if local_zone_id not in store.zones:
            raise DomainError("UNKNOWN_ZONE", f"local zone {local_zone_id!r} has no zone file")
        return store


def _edge_valid(store: TrustStore, from_id: str, to_id: str) -> bool:
    from_zone = store.zones.get(from_id)
    to_zone = store.zones.get(to_id)
    if from_zone is None or to_zone is None:
        return False
    for cross in from_zone.cross_signatures:
        if cross.other_zone_id != to_id:
            continue
        message = cross_sign_message(from_id, to_id, to_zone.root_key())
        if verify_signature(from_zone.root_key(), message, cross.signature):
            return True
    return False


def cross_trust_depth(store: TrustStore, zone_a: str, zone_b: str) -> Optional[int]:
    """Hops from *zone_a* to *zone_b* along valid cross-signatures, if <= 2."""
    if zone_a not in store.zones or zone_b not in store.zones:
        return None
    if zone_a == zone_b:
        return 0
    if _edge_valid(store, zone_a, zone_b):
        return 1
    for mid in store.zones:
        if mid in (zone_a, zone_b):
            continue
        if _edge_valid(store, zone_a, mid) and _edge_valid(store, mid, zone_b):
            return 2
    return None


def check_cross_trust(zone_a: str, zone_b: str, store: TrustStore) -> bool:
    """True iff a verifier anchored in *zone_a* may trust issuers in *zone_b*."""
    store.zone(zone_a)
    store.zone(zone_b)
    depth = cross_trust_depth(store, zone_a, zone_b)
    return depth is not None and depth <= MAX_CROSS_CHAIN
