"""The unified descriptor and its four dialect translations.

The unified form carries what every dialect can express first-class (name,
endpoint, capabilities, auth hint) plus an ordered extension map for
everything else, keyed ``<dialect>.<field>``. Translation is lossless by
construction:

  - a dialect's own extensions render back as its top-level fields,
  - foreign-namespaced extensions ride in the dialect's extension slot
    verbatim (for plain HTTPS everything non-URL rides in the ``comment``
    block, capabilities included),
  - unknown top-level fields of an incoming document land in the unified
    extensions under the source dialect's namespace.

Equality after a round trip is byte equality of canonical serializations,
which is what the tests assert.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from nanda.agentfacts.ids import AgentId, parse_agent_id
from nanda.agentfacts.model import EndpointDescriptor, EndpointProtocol
from nanda.adapter.validator import load_schema, validate
from nanda.errors import DomainError

UNREPRESENTABLE = "UNREPRESENTABLE"
EXTENSION_COLLISION = "EXTENSION_COLLISION"


class Dialect(str, Enum):
    MCP = "mcp"
    A2A = "a2a"
    NLWEB = "nlweb"
    HTTPS = "https"


class AuthHint(str, Enum):
    NONE = "NONE"
    BEARER = "BEARER"
    MUTUAL = "MUTUAL"


_AUTH_WIRE = {AuthHint.NONE: "none", AuthHint.BEARER: "bearer", AuthHint.MUTUAL: "mutual"}
_AUTH_FROM_WIRE = {v: k for k, v in _AUTH_WIRE.items()}

# Top-level names a dialect claims for itself; extensions may not shadow them.
_RESERVED: dict[Dialect, frozenset[str]] = {
    Dialect.MCP: frozenset({"mcpVersion", "server", "auth", "tools", "meta"}),
    Dialect.A2A: frozenset(
        {"a2aVersion", "agentId", "displayName", "serviceEndpoint", "skills",
         "authentication", "extensions"}
    ),
    Dialect.NLWEB: frozenset({"nlwebVersion", "site", "api", "actions", "access", "vendor"}),
    Dialect.HTTPS: frozenset({"httpsVersion", "url", "comment"}),
}


@dataclass(frozen=True)
class UnifiedDescriptor:
    agent_id: AgentId
    display_name: str
    endpoint: EndpointDescriptor
    capabilities: tuple[str, ...]
    auth_hint: AuthHint = AuthHint.NONE
    extensions: tuple[tuple[str, object], ...] = ()

    def extension_dict(self) -> dict:
        return dict(self.extensions)

    def to_json_dict(self) -> dict:
        return {
            "agent_id": self.agent_id.urn,
            "display_name": self.display_name,
            "endpoint": self.endpoint.to_json_dict(),
            "capabilities": list(self.capabilities),
            "auth_hint": self.auth_hint.value,
            "extensions": {k: v for k, v in self.extensions},
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "UnifiedDescriptor":
        return cls(
            agent_id=parse_agent_id(body["agent_id"]),
            display_name=str(body["display_name"]),
            endpoint=EndpointDescriptor.from_json_dict(body["endpoint"]),
            capabilities=tuple(str(c) for c in body.get("capabilities", [])),
            auth_hint=AuthHint(body.get("auth_hint", "NONE")),
            extensions=_ordered_extensions(body.get("extensions", {})),
        )


@dataclass(frozen=True)
class DialectDoc:
    dialect: Dialect
    body: dict

    def to_json_dict(self) -> dict:
        return {"dialect": self.dialect.value, "body": self.body}


def _ordered_extensions(mapping: dict) -> tuple[tuple[str, object], ...]:
    return tuple((k, mapping[k]) for k in sorted(mapping, key=lambda s: s.encode("utf-16-be")))


def _split_extensions(
    u: UnifiedDescriptor, dialect: Dialect
) -> tuple[dict, dict]:
    """(top-level fields for this dialect, foreign entries kept namespaced)."""
    own: dict = {}
    foreign: dict = {}
    prefix = dialect.value + "."
    for key, value in u.extensions:
        if key.startswith(prefix):
            name = key[len(prefix):]
            if name in _RESERVED[dialect]:
                raise DomainError(
                    EXTENSION_COLLISION,
                    f"extension {key!r} shadows a reserved {dialect.value} field",
                )
            own[name] = value
        else:
            foreign[key] = value
    return own, foreign


def to_dialect(u: UnifiedDescriptor, dialect: Dialect) -> DialectDoc:
    """Render the unified descriptor in one dialect; deterministic and
    schema-valid by construction."""
    own, foreign = _split_extensions(u, dialect)
    protocol = u.endpoint.protocol.value
    auth = _AUTH_WIRE[u.auth_hint]

    if dialect is Dialect.MCP:
        body: dict = {
            "mcpVersion": "0.1",
            "server": {
                "id": u.agent_id.urn,
                "label": u.display_name,
                "transport": protocol,
                "endpoint": u.endpoint.url,
                "priority": u.endpoint.priority,
            },
            "auth": auth,
            "tools": [{"name": c} for c in u.capabilities],
        }
        if foreign:
            body["meta"] = foreign
    elif dialect is Dialect.A2A:
        body = {
            "a2aVersion": "0.1",
            "agentId": u.agent_id.urn,
            "displayName": u.display_name,
            "serviceEndpoint": {
                "uri": u.endpoint.url,
                "transport": protocol,
                "priority": u.endpoint.priority,
            },
            "skills": list(u.capabilities),
            "authentication": auth,
        }
        if foreign:
            body["extensions"] = foreign
    elif dialect is Dialect.NLWEB:
        body = {
            "nlwebVersion": "0.1",
            "site": {"agent": u.agent_id.urn, "title": u.display_name},
            "api": {
                "href": u.endpoint.url,
                "protocol": protocol,
                "rank": u.endpoint.priority,
            },
            "actions": list(u.capabilities),
            "access": auth,
        }
        if foreign:
            body["vendor"] = foreign
    else:
        comment: dict = {
            "agentId": u.agent_id.urn,
            "displayName": u.display_name,
            "authHint": auth,
            "protocol": protocol,
            "priority": u.endpoint.priority,
            "capabilities": list(u.capabilities),
        }
        if foreign:
            comment["extensions"] = foreign
        body = {"httpsVersion": "0.1", "url": u.endpoint.url, "comment": comment}

    body.update(own)
    doc = DialectDoc(dialect=dialect, body=body)
    validate(doc.body, load_schema(dialect.value))
    return doc


def from_dialect(doc: DialectDoc) -> UnifiedDescriptor:
    """Parse a dialect document back to the unified form (inverse of
    ``to_dialect`` on its image)."""
    validate(doc.body, load_schema(doc.dialect.value))
    body = doc.body
    extensions: dict = {}

    if doc.dialect is Dialect.MCP:
        server = body["server"]
        core = dict(
            agent_id=parse_agent_id(server["id"]),
            display_name=server["label"],
            endpoint=EndpointDescriptor(
                protocol=EndpointProtocol(server["transport"]),
                url=server["endpoint"],
                priority=server["priority"],
            ),
            capabilities=tuple(t["name"] for t in body["tools"]),
            auth_hint=_AUTH_FROM_WIRE[body["auth"]],
        )
        extensions.update(body.get("meta", {}))
    elif doc.dialect is Dialect.A2A:
        endpoint = body["serviceEndpoint"]
        core = dict(
            agent_id=parse_agent_id(body["agentId"]),
            display_name=body["displayName"],
            endpoint=EndpointDescriptor(
                protocol=EndpointProtocol(endpoint["transport"]),
                url=endpoint["uri"],
                priority=endpoint["priority"],
            ),
            capabilities=tuple(body["skills"]),
            auth_hint=_AUTH_FROM_WIRE[body["authentication"]],
        )
        extensions.update(body.get("extensions", {}))
    elif doc.dialect is Dialect.NLWEB:
        api = body["api"]
        core = dict(
            agent_id=parse_agent_id(body["site"]["agent"]),
            display_name=body["site"]["title"],
            endpoint=EndpointDescriptor(
                protocol=EndpointProtocol(api["protocol"]),
                url=api["href"],
                priority=api["rank"],
            ),
            capabilities=tuple(body["actions"]),
            auth_hint=_AUTH_FROM_WIRE[body["access"]],
        )
        extensions.update(body.get("vendor", {}))
    else:
        comment = body["comment"]
        core = dict(
            agent_id=parse_agent_id(comment["agentId"]),
            display_name=comment["displayName"],
            endpoint=EndpointDescriptor(
                protocol=EndpointProtocol(comment["protocol"]),
                url=body["url"],
                priority=comment["priority"],
            ),
            capabilities=tuple(comment["capabilities"]),
            auth_hint=_AUTH_FROM_WIRE[comment["authHint"]],
        )
        extensions.update(comment.get("extensions", {}))

    for key, value in body.items():
        if key not in _RESERVED[doc.dialect]:
            extensions[f"{doc.dialect.value}.{key}"] = value

    return UnifiedDescriptor(extensions=_ordered_extensions(extensions), **core)


def bridge(source: DialectDoc, target: Dialect) -> DialectDoc:
    """Translate a document straight across two dialects."""
    return to_dialect(from_dialect(source), target)
