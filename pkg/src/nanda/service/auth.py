"""Bearer-token authentication.

Two verifier modes behind one interface: DEV_STATIC maps literal tokens from
the config file to principals; JWT_VERIFY checks an HS256 token (header.kid
selects the shared secret) and its expiry. Real OAuth would slot in as a
third verifier without touching handlers.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
from dataclasses import dataclass
from typing import Optional

from nanda.errors import DomainError
from nanda.service.config import ServiceConfig, StaticToken

TOKEN_INVALID = "TOKEN_INVALID"
TOKEN_EXPIRED = "TOKEN_EXPIRED"
AUTH_REQUIRED = "AUTH_REQUIRED"

ROLE_OWNER_SCOPE = "OWNER_SCOPE"
ROLE_ADMIN = "ADMIN"


@dataclass(frozen=True)
class Principal:
    principal_id: str
    roles: frozenset[str]
    token_expiry: Optional[int] = None

    @property
    def is_admin(self) -> bool:
        return ROLE_ADMIN in self.roles


def _b64url_decode(segment: str) -> bytes:
    padded = segment + "=" * (-len(segment) % 4)
    return base64.urlsafe_b64decode(padded.encode("ascii"))


def _b64url_encode(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def mint_jwt(secret: bytes, *, kid: str, principal_id: str, roles: list[str], exp: int) -> str:
    header = _b64url_encode(json.dumps({"alg": "HS256", "kid": kid}).encode())
    payload = _b64url_encode(
        json.dumps({"sub": principal_id, "roles": roles, "exp": exp}).encode()
    )
    signing_input = f"{header}.{payload}".encode("ascii")
    signature = _b64url_encode(hmac.new(secret, signing_input, hashlib.sha256).digest())
    return f"{header}.{payload}.{signature}"


def authenticate(token: Optional[str], config: ServiceConfig, now: int) -> Principal:
    if not token:
        raise DomainError(AUTH_REQUIRED, "missing bearer token")
    if config.token_verifier == "DEV_STATIC":
        return _verify_static(token, config, now)
    return _verify_jwt(token, config, now)


def _verify_static(token: str, config: ServiceConfig, now: int) -> Principal:
    entry: Optional[StaticToken] = config.static_tokens.get(token)
    if entry is None:
        raise DomainError(TOKEN_INVALID, "unknown token")
    if entry.expires_at is not None and entry.expires_at <= now:
        raise DomainError(TOKEN_EXPIRED, "token expired")
    return Principal(
        principal_id=entry.principal_id, roles=entry.roles, token_expiry=entry.expires_at
    )


def _verify_jwt(token: str, config: ServiceConfig, now: int) -> Principal:
    parts = token.split(".")
    if len(parts) != 3:
        raise DomainError(TOKEN_INVALID, "malformed JWT")
    try:
        header = json.loads(_b64url_decode(parts[0]))
        payload = json.loads(_b64url_decode(parts[1]))
        signature = _b64url_decode(parts[2])
    except (ValueError, TypeError) as exc:
        raise DomainError(TOKEN_INVALID, f"undecodable JWT: {exc}") from exc
    if header.get("alg") != "HS256":
        raise DomainError(TOKEN_INVALID, "unsupported JWT alg")
    secret = config.jwt_keys.get(header.get("kid"))
    if secret is None:
        raise DomainError(TOKEN_INVALID, "unknown signing key")
    signing_input = f"{parts[0]}.{parts[1]}".encode("ascii")
    expected = hmac.new(secret, signing_input, hashlib.sha256).digest()
    if not hmac.compare_digest(signature, expected):
        raise DomainError(TOKEN_INVALID, "signature mismatch")
    exp = payload.get("exp")
    if not isinstance(exp, int):
        raise DomainError(TOKEN_INVALID, "JWT missing exp")
    if exp <= now:
        raise DomainError(TOKEN_EXPIRED, "token expired")
    sub = payload.get("sub")
    if not sub:
        raise DomainError(TOKEN_INVALID, "JWT missing sub")
    return Principal(
        principal_id=str(sub),
        roles=frozenset(payload.get("roles", [ROLE_OWNER_SCOPE])),
        token_expiry=exp,
    )
