"""Issuer-published revocation bitstrings.

A claim's ``status_ref`` names a (list_id, index) pair; bit = 1 at that index
means revoked. Bit order is little-endian within each byte (index 0 is the
least significant bit of byte 0). Lists only grow and set bits never clear,
so a verifier can cache a list and only ever become stricter.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field
from typing import Optional

from nanda.agentfacts.canonical import canonicalize
from nanda.agentfacts.ids import Did, parse_did
from nanda.credentials.keys import SCHEME, SigningKey, verify_signature
from nanda.credentials.trust import TrustStore
from nanda.errors import DomainError

SIGNER_MISMATCH = "SIGNER_MISMATCH"


@dataclass(frozen=True)
class StatusList:
    issuer: Did
    list_id: str
    bits: bytes
    updated_at: int
    signature: bytes
    scheme: str = SCHEME

    def signing_body(self) -> dict:
        return {
            "issuer": str(self.issuer),
            "list_id": self.list_id,
            "bits": base64.b64encode(self.bits).decode("ascii"),
            "updated_at": self.updated_at,
            "scheme": self.scheme,
        }

    def is_revoked(self, index: int) -> bool:
        byte, bit = divmod(index, 8)
        if byte >= len(self.bits):
            return False
        return bool(self.bits[byte] >> bit & 1)

    def verify(self, issuer_key: bytes) -> bool:
        return verify_signature(issuer_key, canonicalize(self.signing_body()), self.signature)

    def to_json_dict(self) -> dict:
        body = self.signing_body()
        body["signature"] = base64.b64encode(self.signature).decode("ascii")
        return body

    @classmethod
    def from_json_dict(cls, body: dict) -> "StatusList":
        return cls(
            issuer=parse_did(body["issuer"]),
            list_id=body["list_id"],
            bits=base64.b64decode(body["bits"]),
            updated_at=int(body["updated_at"]),
            signature=base64.b64decode(body["signature"]),
            scheme=body.get("scheme", SCHEME),
        )


def new_status_list(
    issuer: Did, list_id: str, issuer_key: SigningKey, *, now: int, size_bits: int = 8
) -> StatusList:
    """A fresh all-zeros list covering at least *size_bits* bits."""
    _require_issuer_key(issuer, issuer_key)
    size_bytes = max(1, (size_bits + 7) // 8)
    unsigned = StatusList(
        issuer=issuer, list_id=list_id, bits=bytes(size_bytes), updated_at=now, signature=b""
    )
    return _signed(unsigned, issuer_key)


def revoke(
    status_list: StatusList,
    index: int,
    issuer_key: SigningKey,
    *,
    now: int,
    trust_store: Optional[TrustStore] = None,
) -> StatusList:
    """Set bit *index*, growing the list if needed, and re-sign.

    The re-signing key must belong to the list's issuer: for ``did:nanda``
    the key digest embedded in the DID is checked; for ``did:web`` the key
    is looked up in *trust_store*.
    """
    if index < 0:
        raise DomainError("BAD_VALUE", "revocation index must be >= 0")
    _require_issuer_key(status_list.issuer, issuer_key, trust_store)
    byte, bit = divmod(index, 8)
    bits = bytearray(status_list.bits)
    if byte >= len(bits):
        bits.extend(bytes(byte + 1 - len(bits)))
    bits[byte] |= 1 << bit
    unsigned = StatusList(
        issuer=status_list.issuer,
        list_id=status_list.list_id,
        bits=bytes(bits),
        updated_at=now,
        signature=b"",
        scheme=status_list.scheme,
    )
    return _signed(unsigned, issuer_key)


def _signed(unsigned: StatusList, issuer_key: SigningKey) -> StatusList:
    signature = issuer_key.sign(canonicalize(unsigned.signing_body()))
    return StatusList(
        issuer=unsigned.issuer,
        list_id=unsigned.list_id,
        bits=unsigned.bits,
        updated_at=unsigned.updated_at,
        signature=signature,
        scheme=unsigned.scheme,
    )


def _require_issuer_key(
    issuer: Did, issuer_key: SigningKey, trust_store: Optional[TrustStore] = None
) -> None:
    if issuer.method == "nanda":
        if not issuer.matches_public_key(issuer_key.public_bytes):
            raise DomainError(SIGNER_MISMATCH, "signing key does not match the list issuer DID")
        return
    if trust_store is not None:
        found = trust_store.find_issuer(issuer)
        if found is not None and found[1].public_key == issuer_key.public_bytes:
            return
    raise DomainError(SIGNER_MISMATCH, f"cannot bind signing key to issuer {issuer}")


class StatusListStore:
    """In-memory map of published lists, keyed by (issuer, list_id)."""

    def __init__(self) -> None:
        self._lists: dict[tuple[str, str], StatusList] = {}

    def put(self, status_list: StatusList) -> None:
        key = (str(status_list.issuer), status_list.list_id)
        previous = self._lists.get(key)
        if previous is not None and not _monotone(previous.bits, status_list.bits):
            raise DomainError("STATUS_LIST_REGRESSION", "a set bit may never clear")
        self._lists[key] = status_list

    def get(self, issuer: Did, list_id: str) -> Optional[StatusList]:
        return self._lists.get((str(issuer), list_id))

    def all_lists(self) -> list[StatusList]:
        return [self._lists[k] for k in sorted(self._lists)]


def _monotone(old: bytes, new: bytes) -> bool:
    if len(new) < len(old):
        return False
    return all(o & ~n == 0 for o, n in zip(old, new))
