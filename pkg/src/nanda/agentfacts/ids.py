"""Agent names and decentralized identifiers.

An agent name is a URN of the form ``agent://<zone>/<name>``; a DID is
``did:<method>:<identifier>`` where method is one of:

  - ``nanda``: identifier is the base58-check encoding of a 32-byte digest of
    the agent's public key, so a presented key can be checked against the DID
    without any directory lookup;
  - ``web``: identifier is a hostname, resolved through the local trust store.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from nanda.agentfacts.encoding import b58check_decode, b58check_encode
from nanda.errors import DomainError

MALFORMED_AGENT_ID = "MALFORMED_AGENT_ID"
BAD_DID = "BAD_DID"

_URN_PREFIX = "agent://"
_LABEL_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789-.")
_MAX_LABEL = 64

_HOSTNAME_RE = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?(\.[a-z0-9]([a-z0-9-]*[a-z0-9])?)*$")

DID_METHODS = ("nanda", "web")


@dataclass(frozen=True, order=True)
class AgentId:
    """Parsed ``agent://<zone>/<name>`` identifier."""

    zone: str
    name: str

    @property
    def urn(self) -> str:
        return f"{_URN_PREFIX}{self.zone}/{self.name}"

    def __str__(self) -> str:
        return self.urn


def parse_agent_id(text: str) -> AgentId:
    """Parse an agent URN, reporting the byte offset of the first violation."""

    def fail(offset: int, why: str) -> DomainError:
        return DomainError(MALFORMED_AGENT_ID, why, details={"offset": offset})

    for i, ch in enumerate(_URN_PREFIX):
        if i >= len(text) or text[i] != ch:
            raise fail(i, f"expected {_URN_PREFIX!r} prefix")
    pos = len(_URN_PREFIX)
    zone, pos = _read_label(text, pos, "zone", fail, terminator="/")
    if pos >= len(text) or text[pos] != "/":
        raise fail(pos, "expected '/' between zone and name")
    pos += 1
    name, pos = _read_label(text, pos, "name", fail, terminator=None)
    if pos != len(text):
        raise fail(pos, "trailing characters after name")
    return AgentId(zone=zone, name=name)


def _read_label(text: str, start: int, what: str, fail, terminator) -> tuple[str, int]:
    pos = start
    while pos < len(text):
        ch = text[pos]
        if terminator is not None and ch == terminator:
            break
        if ch not in _LABEL_CHARS:
            raise fail(pos, f"invalid character in {what}")
        pos += 1
        if pos - start > _MAX_LABEL:
            raise fail(start + _MAX_LABEL, f"{what} longer than {_MAX_LABEL} characters")
    if pos == start:
        raise fail(start, f"empty {what}")
    return text[start:pos], pos


@dataclass(frozen=True, order=True)
class Did:
    """Parsed ``did:<method>:<identifier>``."""

    method: str
    identifier: str

    def __str__(self) -> str:
        return f"did:{self.method}:{self.identifier}"

    def key_digest(self) -> bytes:
        """The 32-byte public-key digest committed to by a ``did:nanda``."""
        if self.method != "nanda":
            raise DomainError(BAD_DID, f"did:{self.method} does not embed a key digest")
        return b58check_decode(self.identifier)

    def matches_public_key(self, public_key: bytes) -> bool:
        """True iff this is a ``did:nanda`` committing to *public_key*."""
        if self.method != "nanda":
            return False
        return self.key_digest() == hashlib.sha256(public_key).digest()


def did_for_public_key(public_key: bytes) -> Did:
    """Derive the self-certifying ``did:nanda`` for a 32-byte public key."""
    if len(public_key) != 32:
        raise DomainError(BAD_DID, "public key must be 32 bytes")
    digest = hashlib.sha256(public_key).digest()
    return Did(method="nanda", identifier=b58check_encode(digest))


def parse_did(text: str) -> Did:
    parts = text.split(":", 2)
    if len(parts) != 3 or parts[0] != "did":
        raise DomainError(BAD_DID, "expected did:<method>:<identifier>")
    method, identifier = parts[1], parts[2]
    if method not in DID_METHODS:
        raise DomainError(BAD_DID, f"unsupported did method {method!r}")
    if method == "nanda":
        try:
            digest = b58check_decode(identifier)
        except ValueError as exc:
            raise DomainError(BAD_DID, f"bad did:nanda identifier: {exc}") from exc
        if len(digest) != 32:
            raise DomainError(BAD_DID, "did:nanda identifier must decode to 32 bytes")
    else:
        if not identifier or len(identifier) > 253 or not _HOSTNAME_RE.match(identifier):
            raise DomainError(BAD_DID, "did:web identifier must be a lowercase hostname")
    return Did(method=method, identifier=identifier)
