"""Canonical JSON bytes for signing and hashing, following RFC 8785 (JCS).

Every signature and every hash in this codebase is computed over the output
of :func:`canonicalize`, so two logically equal values must always produce
byte-identical output:

  - object keys sorted by UTF-16 code units (not code points; the two orders
    differ for supplementary-plane characters),
  - no insignificant whitespace,
  - strings minimally escaped, emitted as UTF-8,
  - numbers in ECMAScript ``Number::toString`` shortest form.

Profile restrictions (rejected with ``NON_CANONICALIZABLE``): NaN/Infinity,
integers outside the IEEE-754 exactly-representable range, and any value that
is not null/bool/int/float/str/list/tuple/dict.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

from nanda.errors import DomainError

NON_CANONICALIZABLE = "NON_CANONICALIZABLE"

# Largest integer magnitude an IEEE-754 double represents exactly (2^53 - 1).
_MAX_SAFE_INT = 9007199254740991

_ESCAPES = {
    0x08: "\\b",
    0x09: "\\t",
    0x0A: "\\n",
    0x0C: "\\f",
    0x0D: "\\r",
    0x22: '\\"',
    0x5C: "\\\\",
}


def canonicalize(value: Any) -> bytes:
    """Serialize *value* to canonical JSON bytes."""
    out: list[str] = []
    _write(value, out)
    return "".join(out).encode("utf-8")


def canonical_sha256(value: Any) -> bytes:
    """SHA-256 digest of the canonical bytes of *value*."""
    return hashlib.sha256(canonicalize(value)).digest()


def from_canonical_json(text: str | bytes) -> Any:
    """Parse JSON under the profile's number semantics.

    Numbers are doubles: integer literals inside the exact range stay ints,
    anything larger becomes a float, and NaN/Infinity literals are rejected.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    def parse_int(literal: str) -> Any:
        v = int(literal)
        return v if abs(v) <= _MAX_SAFE_INT else float(literal)

    def reject_constant(name: str) -> Any:
        raise DomainError(NON_CANONICALIZABLE, f"{name} is outside the profile")

    return json.loads(text, parse_int=parse_int, parse_constant=reject_constant)


def _write(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        if abs(value) <= _MAX_SAFE_INT:
            out.append(str(value))
        else:
            # Large integers are admitted only when they denote the same JSON
            # number as a double, which keeps parse/serialize idempotent.
            as_double = float(value)
            if math.isinf(as_double) or int(as_double) != value:
                raise DomainError(
                    NON_CANONICALIZABLE, f"integer {value} is not exactly a double"
                )
            out.append(_format_number(as_double))
    elif isinstance(value, float):
        out.append(_format_number(value))
    elif isinstance(value, str):
        _write_string(value, out)
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        first = True
        for key in sorted(value.keys(), key=_utf16_sort_key):
            if not isinstance(key, str):
                raise DomainError(NON_CANONICALIZABLE, "object keys must be strings")
            if not first:
                out.append(",")
            first = False
            _write_string(key, out)
            out.append(":")
            _write(value[key], out)
        out.append("}")
    else:
        raise DomainError(
            NON_CANONICALIZABLE, f"type {type(value).__name__} is outside the profile"
        )


def _utf16_sort_key(key: str) -> bytes:
    return key.encode("utf-16-be")


def _write_string(s: str, out: list[str]) -> None:
    out.append('"')
    for ch in s:
        cp = ord(ch)
        esc = _ESCAPES.get(cp)
        if esc is not None:
            out.append(esc)
        elif cp < 0x20:
            out.append(f"\\u{cp:04x}")
        else:
            out.append(ch)
    out.append('"')


def _format_number(x: float) -> str:
    """ECMAScript Number::toString for a finite double.

    Python's ``repr`` already yields the shortest round-tripping digits; this
    reshapes them into the ES notation (plain decimal for exponents in
    (-7, 21], exponential outside).
    """
    if math.isnan(x) or math.isinf(x):
        raise DomainError(NON_CANONICALIZABLE, "non-finite numbers are outside the profile")
    if x == 0.0:
        return "0"  # covers -0.0

    negative = x < 0
    digits, point = _shortest_digits(abs(x))

    s = digits
    k = len(s)
    n = point
    if k <= n <= 21:
        body = s + "0" * (n - k)
    elif 0 < n <= 21:
        body = s[:n] + "." + s[n:]
    elif -6 < n <= 0:
        body = "0." + "0" * (-n) + s
    else:
        exp = n - 1
        mant = s[0] if k == 1 else s[0] + "." + s[1:]
        body = f"{mant}e{'+' if exp >= 0 else '-'}{abs(exp)}"
    return "-" + body if negative else body


def _shortest_digits(x: float) -> tuple[str, int]:
    """Decompose positive *x* into (digits, n) with x == 0.digits * 10**n."""
    r = repr(x)
    if "e" in r or "E" in r:
        mantissa, _, exp_part = r.lower().partition("e")
        exp = int(exp_part)
    else:
        mantissa, exp = r, 0
    if "." in mantissa:
        int_part, _, frac_part = mantissa.partition(".")
    else:
        int_part, frac_part = mantissa, ""
    digits = int_part + frac_part
    point = len(int_part) + exp
    stripped = digits.lstrip("0")
    point -= len(digits) - len(stripped)
    digits = stripped.rstrip("0")
    return digits, point
