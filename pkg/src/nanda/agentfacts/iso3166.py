"""Vendored ISO 3166-1 alpha-2 table.

Pinned as a data file so region validation is reproducible offline; the
edition marker inside the file records which state of the standard it
reflects.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def alpha2_codes() -> frozenset[str]:
    payload = resources.files("nanda.agentfacts").joinpath("data/iso3166_alpha2.json")
    doc = json.loads(payload.read_text(encoding="utf-8"))
    return frozenset(doc["codes"])


def is_region(code: str) -> bool:
    return code in alpha2_codes()
