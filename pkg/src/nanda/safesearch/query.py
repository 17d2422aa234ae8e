"""Discovery query parsing.

The wire form is a URL query string, e.g.

    capability=education.tutoring&exclude_flags=political&requires_cert=kid-safe-cert-v1

Set-valued parameters may repeat and merge; scalar parameters may not repeat.
Unknown parameter names are rejected rather than ignored so a typo in a
safety filter cannot silently widen results.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional
from urllib.parse import parse_qsl

from nanda.agentfacts.iso3166 import is_region
from nanda.errors import DomainError

UNKNOWN_PARAM = "UNKNOWN_PARAM"
BAD_VALUE = "BAD_VALUE"

MIN_LIMIT = 1
MAX_LIMIT = 500
DEFAULT_LIMIT = 50

_CAPABILITY_RE = re.compile(r"^[a-z0-9_-]+(\.[a-z0-9_-]+)*$")

_SET_PARAMS = frozenset({"exclude_flags", "requires_cert", "regions"})
_SCALAR_PARAMS = frozenset({"capability", "min_reputation", "include_nsa", "limit"})


@dataclass(frozen=True)
class SearchQuery:
    capability: Optional[str] = None
    exclude_flags: frozenset[str] = frozenset()
    requires_cert: frozenset[str] = frozenset()
    min_reputation: Optional[int] = None
    regions: Optional[frozenset[str]] = None
    include_nsa: bool = False
    limit: int = DEFAULT_LIMIT

    def to_json_dict(self) -> dict:
        return {
            "capability": self.capability,
            "exclude_flags": sorted(self.exclude_flags),
            "requires_cert": sorted(self.requires_cert),
            "min_reputation": self.min_reputation,
            "regions": None if self.regions is None else sorted(self.regions),
            "include_nsa": self.include_nsa,
            "limit": self.limit,
        }

    @classmethod
    def from_json_dict(cls, body: dict) -> "SearchQuery":
        regions = body.get("regions")
        return cls(
            capability=body.get("capability"),
            exclude_flags=frozenset(body.get("exclude_flags", [])),
            requires_cert=frozenset(body.get("requires_cert", [])),
            min_reputation=body.get("min_reputation"),
            regions=None if regions is None else frozenset(regions),
            include_nsa=bool(body.get("include_nsa", False)),
            limit=int(body.get("limit", DEFAULT_LIMIT)),
        )


def parse_query(query_string: str) -> SearchQuery:
    pairs = parse_qsl(query_string, keep_blank_values=True, separator="&")
    sets: dict[str, set[str]] = {name: set() for name in _SET_PARAMS}
    scalars: dict[str, str] = {}
    for name, value in pairs:
        if name in _SET_PARAMS:
            if not value:
                raise DomainError(BAD_VALUE, f"empty value for {name}", details={"param": name})
            sets[name].add(value)
        elif name in _SCALAR_PARAMS:
            if name in scalars:
                raise DomainError(
                    BAD_VALUE, f"{name} given more than once", details={"param": name}
                )
            scalars[name] = value
        else:
            raise DomainError(UNKNOWN_PARAM, f"unknown parameter {name!r}", details={"param": name})

    capability = scalars.get("capability")
    if capability is not None and not _CAPABILITY_RE.match(capability):
        raise DomainError(BAD_VALUE, "malformed capability", details={"param": "capability"})

    min_reputation = None
    if "min_reputation" in scalars:
        min_reputation = _parse_int("min_reputation", scalars["min_reputation"], 0, 100)

    limit = DEFAULT_LIMIT
    if "limit" in scalars:
        limit = _parse_int("limit", scalars["limit"], MIN_LIMIT, MAX_LIMIT)

    include_nsa = False
    if "include_nsa" in scalars:
        raw = scalars["include_nsa"]
        if raw not in ("true", "false"):
            raise DomainError(
                BAD_VALUE, "include_nsa must be true or false", details={"param": "include_nsa"}
            )
        include_nsa = raw == "true"

    regions: Optional[frozenset[str]] = None
    if sets["regions"]:
        for region in sets["regions"]:
            if not is_region(region):
                raise DomainError(
                    BAD_VALUE, f"{region!r} is not an ISO 3166-1 alpha-2 code",
                    details={"param": "regions"},
                )
        regions = frozenset(sets["regions"])

    return SearchQuery(
        capability=capability,
        exclude_flags=frozenset(sets["exclude_flags"]),
        requires_cert=frozenset(sets["requires_cert"]),
        min_reputation=min_reputation,
        regions=regions,
        include_nsa=include_nsa,
        limit=limit,
    )


def _parse_int(name: str, raw: str, lo: int, hi: int) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(BAD_VALUE, f"{name} must be an integer", details={"param": name}) from None
    if not lo <= value <= hi:
        raise DomainError(
            BAD_VALUE, f"{name} must be in [{lo}, {hi}]", details={"param": name}
        )
    return value
