from nanda.adapter.descriptor import (
    AuthHint,
    Dialect,
    DialectDoc,
    UnifiedDescriptor,
    bridge,
    from_dialect,
    to_dialect,
)
from nanda.adapter.validator import SCHEMA_VIOLATION, load_schema, validate

__all__ = [
    "AuthHint",
    "Dialect",
    "DialectDoc",
    "SCHEMA_VIOLATION",
    "UnifiedDescriptor",
    "bridge",
    "from_dialect",
    "load_schema",
    "to_dialect",
    "validate",
]
