"""The AgentFacts document: the registry's record of one agent.

Documents are plain values. ``validate_doc`` reports every invariant
violation as data (it never raises), which lets the registry attach the full
report to an ``INVALID_DOC`` rejection and lets tests construct deliberately
broken documents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Optional
from urllib.parse import urlsplit

from nanda.agentfacts.ids import AgentId, Did, parse_agent_id, parse_did
from nanda.agentfacts.iso3166 import is_region
from nanda.credentials.claims import VerifiableClaim
from nanda.errors import DomainError

INVALID_DOC = "INVALID_DOC"

_CAPABILITY_RE = re.compile(r"^[a-z0-9_-]+(\.[a-z0-9_-]+)*$")
_FLAG_RE = re.compile(r"^[a-z0-9_][a-z0-9_.-]*$")


class AgentStatus(str, Enum):
    ACTIVE = "ACTIVE"
    PAUSED = "PAUSED"
    TERMINATED = "TERMINATED"


class EndpointProtocol(str, Enum):
    MCP = "MCP"
    A2A = "A2A"
    NLWEB = "NLWEB"
    HTTPS = "HTTPS"


@dataclass(frozen=True)
class EndpointDescriptor:
    protocol: EndpointProtocol
    url: str
    priority: int

    def to_json_dict(self) -> dict:
        return {"protocol": self.protocol.value, "url": self.url, "priority": self.priority}

    @classmethod
    def from_json_dict(cls, body: dict) -> "EndpointDescriptor":
        try:
            return cls(
                protocol=EndpointProtocol(body["protocol"]),
                url=str(body["url"]),
                priority=int(body["priority"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(INVALID_DOC, f"bad endpoint descriptor: {exc}") from exc


@dataclass(frozen=True)
class Violation:
    code: str
    field: str
    message: str

    def to_json_dict(self) -> dict:
        return {"code": self.code, "field": self.field, "message": self.message}


ValidationReport = list[Violation]


@dataclass(frozen=True)
class AgentFactsDoc:
    agent_id: AgentId
    did: Did
    owner: str
    endpoints: tuple[EndpointDescriptor, ...]
    capabilities: tuple[str, ...]
    content_flags: tuple[str, ...]
    regions: tuple[str, ...]
    claims: tuple[VerifiableClaim, ...]
    registered_at: int
    status: AgentStatus
    version: int

    def with_(self, **changes: Any) -> "AgentFactsDoc":
        return replace(self, **changes)

    def to_json_dict(self) -> dict:
        return {
            "agent_id": self.agent_id.urn,
            "did": str(self.did),
            "owner": self.owner,
            "endpoints": [e.to_json_dict() for e in self.endpoints],
            "capabilities": list(self.capabilities),
            "content_flags": list(self.content_flags),
            "regions": list(self.regions),
            "claims": [c.to_json_dict() for c in self.claims],
            "registered_at": self.registered_at,
            "status": self.status.value,
            "version": self.version,
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "AgentFactsDoc":
        if not isinstance(body, dict):
            raise DomainError(INVALID_DOC, "document body must be a JSON object")
        try:
            return cls(
                agent_id=parse_agent_id(str(body["agent_id"])),
                did=parse_did(str(body["did"])),
                owner=str(body["owner"]),
                endpoints=tuple(
                    EndpointDescriptor.from_json_dict(e) for e in body.get("endpoints", [])
                ),
                capabilities=tuple(str(c) for c in body.get("capabilities", [])),
                content_flags=tuple(str(f) for f in body.get("content_flags", [])),
                regions=tuple(str(r) for r in body.get("regions", [])),
                claims=tuple(
                    VerifiableClaim.from_json_dict(c) for c in body.get("claims", [])
                ),
                registered_at=int(body["registered_at"]),
                status=AgentStatus(body["status"]),
                version=int(body["version"]),
            )
        except DomainError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(INVALID_DOC, f"bad document: {exc}") from exc


def validate_doc(doc: AgentFactsDoc) -> ValidationReport:
    """List every invariant violation in *doc*; an empty list means valid."""
    report: ValidationReport = []

    if not doc.owner:
        report.append(Violation("BAD_OWNER", "owner", "owner must not be empty"))

    if doc.status is AgentStatus.ACTIVE and not doc.endpoints:
        report.append(
            Violation("NO_ENDPOINT", "endpoints", "an ACTIVE agent needs at least one endpoint")
        )
    priorities: set[int] = set()
    for i, ep in enumerate(doc.endpoints):
        field = f"endpoints[{i}]"
        parts = urlsplit(ep.url)
        if parts.scheme != "https" or not parts.netloc:
            report.append(Violation("BAD_URL", field, f"not an absolute https URL: {ep.url!r}"))
        if ep.priority < 0:
            report.append(Violation("BAD_PRIORITY", field, "priority must be >= 0"))
        elif ep.priority in priorities:
            report.append(Violation("DUP_PRIORITY", field, f"priority {ep.priority} repeats"))
        priorities.add(ep.priority)

    _check_sorted_set(
        report, doc.capabilities, "capabilities",
        _CAPABILITY_RE, "BAD_CAPABILITY", "DUP_CAPABILITY", "UNSORTED_CAPABILITIES",
    )
    _check_sorted_set(
        report, doc.content_flags, "content_flags",
        _FLAG_RE, "BAD_FLAG", "DUP_FLAG", "UNSORTED_FLAGS",
    )
    _check_sorted_set(
        report, doc.regions, "regions",
        None, "BAD_REGION", "DUP_REGION", "UNSORTED_REGIONS",
    )
    for region in doc.regions:
        if not is_region(region):
            report.append(
                Violation("BAD_REGION", "regions", f"{region!r} is not an ISO 3166-1 alpha-2 code")
            )

    status_refs: set[tuple[str, str, int]] = set()
    for i, claim in enumerate(doc.claims):
        if claim.subject != doc.agent_id:
            report.append(
                Violation(
                    "CLAIM_SUBJECT_MISMATCH",
                    f"claims[{i}]",
                    f"claim {claim.claim_id} is about {claim.subject}, not this agent",
                )
            )
        ref = (str(claim.issuer), claim.status_ref.list_id, claim.status_ref.index)
        if ref in status_refs:
            report.append(
                Violation(
                    "DUP_STATUS_REF",
                    f"claims[{i}]",
                    "status_ref index reused within one issuer's list",
                )
            )
        status_refs.add(ref)

    if doc.version < 1:
        report.append(Violation("BAD_VERSION", "version", "version starts at 1"))
    if doc.registered_at < 0:
        report.append(Violation("BAD_TIMESTAMP", "registered_at", "must be a Unix timestamp"))

    return report


def _check_sorted_set(
    report: ValidationReport,
    values: tuple[str, ...],
    field: str,
    pattern: Optional[re.Pattern],
    bad_code: str,
    dup_code: str,
    unsorted_code: str,
) -> None:
    seen: set[str] = set()
    for value in values:
        if pattern is not None and not pattern.match(value):
            report.append(Violation(bad_code, field, f"malformed entry {value!r}"))
        if value in seen:
            report.append(Violation(dup_code, field, f"duplicate entry {value!r}"))
        seen.add(value)
    deduped = [v for i, v in enumerate(values) if v not in values[:i]]
    if list(deduped) != sorted(deduped):
        report.append(Violation(unsorted_code, field, "entries must be stored sorted"))
