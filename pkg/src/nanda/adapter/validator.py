"""Minimal structural validator for the shipped dialect schemas.

Interprets the subset of JSON Schema those files use (type, required,
properties, items, enum, const, minimum, additionalProperties) plus one
extension: ``x-namespaced-keys`` marks an object whose keys must look like
``<dialect>.<field>``. The first violation is reported as a JSON-pointer
path, e.g. ``/serviceEndpoint``.
"""

from __future__ import annotations

import json
import re
from functools import lru_cache
from importlib import resources

from nanda.errors import DomainError

SCHEMA_VIOLATION = "SCHEMA_VIOLATION"

_NAMESPACED_KEY_RE = re.compile(r"^(mcp|a2a|nlweb|https)\.[A-Za-z0-9_.:-]+$")

_TYPE_CHECKS = {
    "object": lambda v: isinstance(v, dict),
    "array": lambda v: isinstance(v, list),
    "string": lambda v: isinstance(v, str),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
}


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    payload = resources.files("nanda.adapter").joinpath(f"schemas/{name}.schema.json")
    return json.loads(payload.read_text(encoding="utf-8"))


def _fail(path: str, message: str) -> DomainError:
    return DomainError(SCHEMA_VIOLATION, message, details={"path": path or "/"})


def validate(value, schema: dict, path: str = "") -> None:
    """Raise SCHEMA_VIOLATION at the first violating location."""
    if "const" in schema:
        if value != schema["const"]:
            raise _fail(path, f"expected {schema['const']!r}")
        return
    if "enum" in schema:
        if value not in schema["enum"]:
            raise _fail(path, f"expected one of {schema['enum']}")
        return

    expected = schema.get("type")
    if expected is not None and not _TYPE_CHECKS[expected](value):
        raise _fail(path, f"expected {expected}")

    if expected == "integer" and "minimum" in schema and value < schema["minimum"]:
        raise _fail(path, f"must be >= {schema['minimum']}")

    if expected == "object":
        properties = schema.get("properties", {})
        for name in schema.get("required", []):
            if name not in value:
                raise _fail(f"{path}/{name}", "required field missing")
        for name, subschema in properties.items():
            if name in value:
                validate(value[name], subschema, f"{path}/{name}")
        if schema.get("x-namespaced-keys"):
            for key in sorted(value.keys(), key=lambda k: k.encode("utf-16-be")):
                if not _NAMESPACED_KEY_RE.match(key):
                    raise _fail(f"{path}/{key}", "extension keys must be <dialect>.<field>")
        elif not schema.get("additionalProperties", True):
            for key in sorted(value.keys(), key=lambda k: k.encode("utf-16-be")):
                if key not in properties:
                    raise _fail(f"{path}/{key}", "unknown field")

    if expected == "array" and "items" in schema:
        for i, item in enumerate(value):
            validate(item, schema["items"], f"{path}/{i}")
