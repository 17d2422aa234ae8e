"""Domain error type shared by every subpackage.

Every failure that crosses a module boundary carries a stable machine-readable
code (e.g. ``NOT_OWNER``, ``VERSION_CONFLICT``). The HTTP layer maps codes to
status classes and echoes the code verbatim in the response body, so codes are
part of the public contract and must not be renamed casually.
"""

from __future__ import annotations

from typing import Any, Optional


class DomainError(Exception):
    """An expected, coded failure of a domain operation."""

    def __init__(self, code: str, message: str, *, details: Optional[Any] = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.details = details

    def to_json_dict(self) -> dict:
        body: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.details is not None:
            body["details"] = self.details
        return body
