"""Service configuration.

Loaded from the JSON file named by ``NANDA_CONFIG`` (or an explicit path).
The whole file validates up front; a service with a half-good config must
refuse to start rather than run with surprising policy.
"""

from __future__ import annotations

import base64
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from nanda.errors import DomainError
from nanda.ztaa.nsa import NsaConfig
from nanda.ztaa.policy import ZtaaPolicy

CONFIG_INVALID = "CONFIG_INVALID"

ENV_CONFIG = "NANDA_CONFIG"

VERIFIER_MODES = ("DEV_STATIC", "JWT_VERIFY")


@dataclass(frozen=True)
class StaticToken:
    principal_id: str
    roles: frozenset[str]
    expires_at: Optional[int] = None


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    listen_host: str = "127.0.0.1"
    listen_port: int = 8470
    token_verifier: str = "DEV_STATIC"
    static_tokens: dict = field(default_factory=dict)  # token -> StaticToken
    jwt_keys: dict = field(default_factory=dict)  # kid -> secret bytes
    nsa: NsaConfig = NsaConfig()
    admin_principals: frozenset[str] = frozenset()
    signature_scheme: str = "ed25519-jcs-v1"
    rate_limit_capacity: int = 200
    rate_limit_refill_per_sec: float = 100.0
    trust_store_dir: Optional[Path] = None
    local_zone: str = "home"
    default_policy: ZtaaPolicy = ZtaaPolicy()
    log_sync: bool = False
    snapshot_every: int = 0  # 0 disables periodic snapshots

    @property
    def event_log_path(self) -> Path:
        return self.data_dir / "registry.events.jsonl"

    @property
    def snapshot_path(self) -> Path:
        return self.data_dir / "registry.snapshot.json"

    @property
    def status_list_dir(self) -> Path:
        return self.data_dir / "status-lists"


def load_config(path: Optional[Path] = None) -> ServiceConfig:
    if path is None:
        env = os.environ.get(ENV_CONFIG)
        if not env:
            raise DomainError(CONFIG_INVALID, f"set {ENV_CONFIG} or pass a config path")
        path = Path(env)
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DomainError(CONFIG_INVALID, f"cannot read config {path}: {exc}") from exc
    return parse_config(raw, base_dir=Path(path).parent)


def parse_config(raw: dict, *, base_dir: Path = Path(".")) -> ServiceConfig:
    problems: list[str] = []

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base_dir / candidate

    data_dir = raw.get("data_dir")
    if not isinstance(data_dir, str) or not data_dir:
        problems.append("data_dir must be a non-empty path")

    mode = raw.get("token_verifier", "DEV_STATIC")
    if mode not in VERIFIER_MODES:
        problems.append(f"token_verifier must be one of {VERIFIER_MODES}")

    static_tokens: dict = {}
    for token, spec in raw.get("static_tokens", {}).items():
        if not isinstance(spec, dict) or "principal_id" not in spec:
            problems.append(f"static token {token!r} needs a principal_id")
            continue
        static_tokens[token] = StaticToken(
            principal_id=spec["principal_id"],
            roles=frozenset(spec.get("roles", ["OWNER_SCOPE"])),
            expires_at=spec.get("expires_at"),
        )
    if mode == "DEV_STATIC" and not static_tokens:
        problems.append("DEV_STATIC verifier needs at least one static token")

    jwt_keys: dict = {}
    for kid, secret_b64 in raw.get("jwt_keys", {}).items():
        try:
            jwt_keys[kid] = base64.b64decode(secret_b64)
        except ValueError:
            problems.append(f"jwt key {kid!r} is not valid base64")
    if mode == "JWT_VERIFY" and not jwt_keys:
        problems.append("JWT_VERIFY verifier needs jwt_keys")

    nsa_raw = raw.get("nsa", {})
    nsa = NsaConfig(
        min_age_days=int(nsa_raw.get("min_age_days", 30)),
        min_attestations=int(nsa_raw.get("min_attestations", 2)),
    )
    if nsa.min_age_days < 0 or nsa.min_attestations < 0:
        problems.append("nsa thresholds must be >= 0")

    rate = raw.get("rate_limit", {})
    capacity = int(rate.get("capacity", 200))
    refill = float(rate.get("refill_per_sec", 100.0))
    if capacity < 1 or refill <= 0:
        problems.append("rate_limit capacity must be >= 1 and refill_per_sec > 0")

    listen = raw.get("listen", {})
    port = int(listen.get("port", 8470))
    if not 0 < port < 65536:
        problems.append("listen.port out of range")

    try:
        policy = ZtaaPolicy.from_json_dict(raw.get("default_policy", {}))
    except (ValueError, KeyError, TypeError) as exc:
        problems.append(f"default_policy malformed: {exc}")
        policy = ZtaaPolicy()

    if problems:
        raise DomainError(CONFIG_INVALID, "; ".join(problems), details=problems)

    trust_dir = raw.get("trust_store_dir")
    return ServiceConfig(
        data_dir=resolve(data_dir),
        listen_host=listen.get("host", "127.0.0.1"),
        listen_port=port,
        token_verifier=mode,
        static_tokens=static_tokens,
        jwt_keys=jwt_keys,
        nsa=nsa,
        admin_principals=frozenset(raw.get("admin_principals", [])),
        signature_scheme=raw.get("signature_scheme", "ed25519-jcs-v1"),
        rate_limit_capacity=capacity,
        rate_limit_refill_per_sec=refill,
        trust_store_dir=resolve(trust_dir) if trust_dir else None,
        local_zone=raw.get("local_zone", "home"),
        default_policy=policy,
        log_sync=bool(raw.get("log_sync", False)),
        snapshot_every=int(raw.get("snapshot_every", 0)),
    )
