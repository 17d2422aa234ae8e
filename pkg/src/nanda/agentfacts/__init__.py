from nanda.agentfacts.canonical import (
    NON_CANONICALIZABLE,
    canonical_sha256,
    canonicalize,
    from_canonical_json,
)
from nanda.agentfacts.ids import AgentId, Did, parse_agent_id, parse_did
from nanda.agentfacts.model import (
    AgentFactsDoc,
    AgentStatus,
    EndpointDescriptor,
    EndpointProtocol,
    ValidationReport,
    Violation,
    validate_doc,
)

__all__ = [
    "AgentFactsDoc",
    "AgentId",
    "AgentStatus",
    "Did",
    "EndpointDescriptor",
    "EndpointProtocol",
    "NON_CANONICALIZABLE",
    "ValidationReport",
    "Violation",
    "canonical_sha256",
    "canonicalize",
    "from_canonical_json",
    "parse_agent_id",
    "parse_did",
    "validate_doc",
]
