from __future__ import annotations

import hashlib
import json
import socket
import threading
import time
from pathlib import Path

import pytest

from nanda.agentfacts.ids import AgentId, did_for_public_key
from nanda.agentfacts.model import (
    AgentFactsDoc,
    AgentStatus,
    EndpointDescriptor,
    EndpointProtocol,
)
from nanda.credentials.keys import SigningKey, keypair_from_seed
from nanda.credentials.trust import (
    IssuerEntry,
    IssuerRole,
    TrustStore,
    TrustZone,
    make_cross_signature,
)


def seeded_key(label: str) -> SigningKey:
    return keypair_from_seed(hashlib.sha256(label.encode()).digest())


def make_zone(zone_id: str, issuer_roles: dict[str, set[IssuerRole]]):
    """Zone with one issuer per label; the first label is the zone root."""
    keys: dict[str, SigningKey] = {}
    entries: list[IssuerEntry] = []
    root_did = None
    for label, roles in issuer_roles.items():
        key = seeded_key(f"{zone_id}/{label}")
        did = did_for_public_key(key.public_bytes)
        keys[label] = key
        entries.append(IssuerEntry(did=did, public_key=key.public_bytes, roles=frozenset(roles)))
        if root_did is None:
            root_did = did
    zone = TrustZone(zone_id=zone_id, root_did=root_did, issuers=tuple(entries))
    return zone, keys


def cross_sign(store: TrustStore, from_zone: str, to_zone: str, from_root_key: SigningKey) -> None:
    a = store.zone(from_zone)
    b = store.zone(to_zone)
    sig = make_cross_signature(a, b, from_root_key)
    store.add_zone(
        TrustZone(
            zone_id=a.zone_id,
            root_did=a.root_did,
            issuers=a.issuers,
            cross_signatures=a.cross_signatures + (sig,),
        )
    )


@pytest.fixture
def trust_env():
    """A small two-zone world: local zone 'home' and remote zone 'partner'."""
    store = TrustStore(local_zone_id="home")
    home, home_keys = make_zone(
        "home",
        {
            "root": {IssuerRole.REGISTRAR},
            "certifier": {IssuerRole.CERTIFIER},
            "auditor": {IssuerRole.AUDITOR},
        },
    )
    partner, partner_keys = make_zone(
        "partner",
        {
            "root": {IssuerRole.REGISTRAR},
            "certifier": {IssuerRole.CERTIFIER, IssuerRole.AUDITOR},
        },
    )
    store.add_zone(home)
    store.add_zone(partner)
    return store, {"home": home_keys, "partner": partner_keys}


def make_doc(
    zone: str = "edu",
    name: str = "tutor-1",
    *,
    owner: str = "alice",
    capabilities: tuple[str, ...] = ("education.tutoring",),
    content_flags: tuple[str, ...] = (),
    regions: tuple[str, ...] = (),
    claims: tuple = (),
    registered_at: int = 1_700_000_000,
    status: AgentStatus = AgentStatus.ACTIVE,
    version: int = 1,
    endpoints: tuple[EndpointDescriptor, ...] | None = None,
    key: SigningKey | None = None,
) -> AgentFactsDoc:
    key = key or seeded_key(f"agent/{zone}/{name}")
    if endpoints is None:
        endpoints = (
            EndpointDescriptor(
                protocol=EndpointProtocol.HTTPS,
                url=f"https://{name}.{zone}.example/agent",
                priority=0,
            ),
        )
    return AgentFactsDoc(
        agent_id=AgentId(zone=zone, name=name),
        did=did_for_public_key(key.public_bytes),
        owner=owner,
        endpoints=endpoints,
        capabilities=capabilities,
        content_flags=content_flags,
        regions=regions,
        claims=claims,
        registered_at=registered_at,
        status=status,
        version=version,
    )


# -- live HTTP service for CLI and end-to-end tests -------------------------------


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def write_key_file(path: Path, key: SigningKey) -> Path:
    path.write_text(json.dumps({"private_key": key.private_bytes.hex()}) + "\n")
    return path


@pytest.fixture
def live_service(tmp_path):
    """A real uvicorn server over a fresh registry, plus deployment files.

    Yields a dict with the base url, the trust-store dir, issuer/agent key
    files, and the config used, ready for CLI runs.
    """
    import uvicorn

    from nanda.credentials.trust import IssuerRole, TrustStore
    from nanda.service.app import create_app
    from nanda.service.config import parse_config

    store = TrustStore(local_zone_id="home")
    zone, zone_keys = make_zone(
        "home",
        {
            "root": {IssuerRole.REGISTRAR},
            "certifier": {IssuerRole.CERTIFIER},
            "auditor": {IssuerRole.AUDITOR},
        },
    )
    store.add_zone(zone)
    trust_dir = tmp_path / "trust"
    store.save(trust_dir)

    keys_dir = tmp_path / "keys"
    keys_dir.mkdir()
    key_files = {
        label: write_key_file(keys_dir / f"{label}.key.json", key)
        for label, key in zone_keys.items()
    }

    config = parse_config(
        {
            "data_dir": str(tmp_path / "data"),
            "token_verifier": "DEV_STATIC",
            "static_tokens": {
                "dev-alice": {"principal_id": "alice", "roles": ["OWNER_SCOPE"]},
                "dev-root": {"principal_id": "root-admin", "roles": ["OWNER_SCOPE", "ADMIN"]},
            },
            "admin_principals": ["root-admin"],
            "nsa": {"min_age_days": 0, "min_attestations": 2},
            "trust_store_dir": str(trust_dir),
            "local_zone": "home",
        }
    )
    app = create_app(config)

    port = free_port()
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.01)

    yield {
        "url": f"http://127.0.0.1:{port}",
        "config": config,
        "trust_dir": trust_dir,
        "key_files": key_files,
        "zone_keys": zone_keys,
        "keys_dir": keys_dir,
        "tmp": tmp_path,
        "app": app,
    }

    server.should_exit = True
    thread.join(timeout=5)
