"""The ``nanda`` command line.

Talks to a running registry service for everything stateful; claim minting,
verification, and descriptor translation also work offline against local
key and trust-store files. Exit codes are stable for scripting:

    0  success
    1  domain error (the service or library rejected the operation)
    2  usage error (bad flags or arguments)

``--output json`` prints canonical JSON on stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import json
import os
import sys
import uuid
from pathlib import Path
from typing import Any, Optional

import click
import httpx

from nanda.agentfacts.canonical import canonicalize
from nanda.agentfacts.ids import did_for_public_key, parse_agent_id, parse_did
from nanda.credentials.claims import (
    ClaimType,
    StatusRef,
    VerifiableClaim,
    sign_claim,
    verify_claim,
)
from nanda.credentials.keys import SigningKey
from nanda.credentials.status_list import StatusList, StatusListStore, revoke
from nanda.credentials.trust import TrustStore
from nanda.errors import DomainError

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2

ENV_TOKEN = "NANDA_TOKEN"
ENV_PROFILE = "NANDA_PROFILE"


def profile_path() -> Path:
    override = os.environ.get(ENV_PROFILE)
    if override:
        return Path(override)
    base = os.environ.get("XDG_CONFIG_HOME", str(Path.home() / ".config"))
    return Path(base) / "nanda" / "profile.json"


def load_profile() -> dict:
    path = profile_path()
    if path.is_file():
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except ValueError:
            pass
    return {}


def save_profile(profile: dict) -> None:
    path = profile_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(profile, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class Ctx:
    def __init__(self, url: Optional[str], token: Optional[str], output: str):
        profile = load_profile()
        self.url = url or profile.get("url") or "http://127.0.0.1:8470"
        self.token = os.environ.get(ENV_TOKEN) or token or profile.get("token")
        self.output = output or profile.get("output") or "table"

    def client(self) -> httpx.Client:
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        return httpx.Client(base_url=self.url, headers=headers, timeout=30.0)

    def emit(self, payload: Any, table_lines: Optional[list[str]] = None) -> None:
        if self.output == "json" or table_lines is None:
            sys.stdout.write(canonicalize(payload).decode("utf-8") + "\n")
        else:
            for line in table_lines:
                sys.stdout.write(line + "\n")


def request_or_die(ctx: Ctx, method: str, path: str, **kwargs) -> dict:
    try:
        with ctx.client() as client:
            response = client.request(method, path, **kwargs)
    except httpx.HTTPError as exc:
        click.echo(f"error: SERVICE_UNREACHABLE: {ctx.url}: {exc}", err=True)
        sys.exit(EXIT_DOMAIN_ERROR)
    try:
        payload = response.json()
    except ValueError:
        payload = {"raw": response.text}
    if response.status_code >= 400:
        error = payload.get("error", {}) if isinstance(payload, dict) else {}
        code = error.get("code", f"HTTP_{response.status_code}")
        message = error.get("message", response.text)
        click.echo(f"error: {code}: {message}", err=True)
        sys.exit(EXIT_DOMAIN_ERROR)
    return payload


def load_key(path: str) -> SigningKey:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return SigningKey.from_private_bytes(bytes.fromhex(raw["private_key"]))


def die_domain(err: DomainError) -> None:
    click.echo(f"error: {err.code}: {err.message}", err=True)
    sys.exit(EXIT_DOMAIN_ERROR)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--url", default=None, help="Service base URL (default from profile).")
@click.option("--token", default=None, help="Bearer token (NANDA_TOKEN overrides).")
@click.option("--output", type=click.Choice(["json", "table"]), default=None)
@click.pass_context
def cli(ctx: click.Context, url, token, output):
    ctx.obj = Ctx(url, token, output)


@cli.command()
@click.argument("doc_file", type=click.Path(exists=True))
@click.pass_obj
def register(ctx: Ctx, doc_file):
    """Register an agent from a .facts.json document."""
    doc = json.loads(Path(doc_file).read_text(encoding="utf-8"))
    payload = request_or_die(ctx, "POST", "/agents", json={"doc": doc})
    ctx.emit(payload, [f"registered {payload['agent_id']} at version {payload['version']}"])


@cli.command("get")
@click.argument("agent")
@click.pass_obj
def get_cmd(ctx: Ctx, agent):
    """Fetch an agent's document (tombstones included)."""
    aid = parse_agent_id(agent)
    payload = request_or_die(ctx, "GET", f"/agents/{aid.zone}/{aid.name}")
    doc = payload["doc"]
    ctx.emit(
        payload,
        [
            f"{doc['agent_id']}  v{doc['version']}  {doc['status']}",
            f"  did: {doc['did']}",
            f"  owner: {doc['owner']}",
            f"  capabilities: {', '.join(doc['capabilities']) or '-'}",
        ],
    )


@cli.command("list")
@click.pass_obj
def list_cmd(ctx: Ctx):
    """List every registered agent with status and risk tier."""
    payload = request_or_die(ctx, "GET", "/agents")
    lines = []
    for row in payload["agents"]:
        doc = row["doc"]
        reputation = row["aggregated_reputation"]
        lines.append(
            f"{doc['agent_id']:40} {doc['status']:10} {row['nsa']['tier']:10} "
            f"rep={'-' if reputation is None else reputation}"
        )
    ctx.emit(payload, lines)


@cli.command()
@click.argument("agent")
@click.argument("doc_file", type=click.Path(exists=True))
@click.pass_obj
def update(ctx: Ctx, agent, doc_file):
    """Replace an agent's document (version must be current + 1)."""
    aid = parse_agent_id(agent)
    doc = json.loads(Path(doc_file).read_text(encoding="utf-8"))
    payload = request_or_die(ctx, "PUT", f"/agents/{aid.zone}/{aid.name}", json={"doc": doc})
    ctx.emit(payload, [f"updated {payload['agent_id']} to version {payload['version']}"])


@cli.command()
@click.argument("agent")
@click.pass_obj
def delete(ctx: Ctx, agent):
    """Terminate an agent (tombstone remains for audit)."""
    aid = parse_agent_id(agent)
    payload = request_or_die(ctx, "DELETE", f"/agents/{aid.zone}/{aid.name}")
    ctx.emit(payload, [f"{payload['agent_id']} is {payload['status']}"])


@cli.command()
@click.argument("agent")
@click.pass_obj
def resolve(ctx: Ctx, agent):
    """Resolve an agent name to its DID and prioritized endpoints."""
    parse_agent_id(agent)
    payload = request_or_die(ctx, "GET", "/resolve", params={"name": agent})
    lines = [f"{payload['agent_id']}  {payload['status']}", f"  did: {payload['did']}"]
    for endpoint in payload["endpoints"]:
        lines.append(f"  [{endpoint['priority']}] {endpoint['protocol']:6} {endpoint['url']}")
    ctx.emit(payload, lines)


@cli.command()
@click.option("--query", "query_string", required=True, help="URL query-string form.")
@click.option("--explain", is_flag=True, help="Include exclusion diagnostics.")
@click.pass_obj
def search(ctx: Ctx, query_string, explain):
    """Run a filtered discovery query (same syntax as GET /search)."""
    suffix = "&explain=true" if explain else ""
    payload = request_or_die(ctx, "GET", f"/search?{query_string}{suffix}")
    lines = []
    for i, row in enumerate(payload["results"], 1):
        reputation = row["aggregated_reputation"]
        lines.append(
            f"{i:3}. {row['agent_id']:40} rep={'-' if reputation is None else reputation:>3}"
            f" tier={row['nsa_tier']}"
        )
    if not lines:
        lines = ["no agents matched"]
    ctx.emit(payload, lines)


# -- claims -----------------------------------------------------------------------


@cli.group()
def claim():
    """Mint, verify, and revoke signed claims (offline key operations)."""


@claim.command()
@click.option("--subject", required=True, help="Agent URN the claim is about.")
@click.option(
    "--type", "claim_type",
    type=click.Choice([t.value for t in ClaimType]), required=True,
)
@click.option("--body", "body_json", required=True, help="Claim body as JSON.")
@click.option("--issuer-key", "key_file", required=True, type=click.Path(exists=True))
@click.option("--trust-store", "trust_dir", required=True, type=click.Path(exists=True))
@click.option("--local-zone", default="home")
@click.option("--list-id", default="main")
@click.option("--index", type=int, required=True, help="Status list index for revocation.")
@click.option("--issued-at", type=int, default=None)
@click.pass_obj
def mint(ctx: Ctx, subject, claim_type, body_json, key_file, trust_dir, local_zone,
         list_id, index, issued_at):
    """Sign a new claim with a locally held issuer key."""
    import time

    try:
        key = load_key(key_file)
        store = TrustStore.load(Path(trust_dir), local_zone)
        minted = sign_claim(
            claim_id=str(uuid.uuid4()),
            subject=parse_agent_id(subject),
            claim_type=ClaimType(claim_type),
            body=json.loads(body_json),
            issuer=did_for_public_key(key.public_bytes),
            issued_at=issued_at if issued_at is not None else int(time.time()),
            status_ref=StatusRef(list_id=list_id, index=index),
            issuer_key=key,
            trust_store=store,
        )
    except DomainError as err:
        die_domain(err)
        return
    ctx.emit(minted.to_json_dict(), [canonicalize(minted.to_json_dict()).decode()])


@claim.command()
@click.argument("claim_file", type=click.Path(exists=True))
@click.option("--trust-store", "trust_dir", required=True, type=click.Path(exists=True))
@click.option("--local-zone", default="home")
@click.option("--fetch-status/--no-fetch-status", default=True,
              help="Pull the claim's status list from the service first.")
@click.pass_obj
def verify(ctx: Ctx, claim_file, trust_dir, local_zone, fetch_status):
    """Verify a claim file against the trust store and revocation state."""
    import time

    parsed = VerifiableClaim.from_json_dict(
        json.loads(Path(claim_file).read_text(encoding="utf-8"))
    )
    store = TrustStore.load(Path(trust_dir), local_zone)
    lists = StatusListStore()
    if fetch_status:
        try:
            body = request_or_die(
                ctx, "GET", f"/status-lists/{parsed.issuer}/{parsed.status_ref.list_id}"
            )
            lists.put(StatusList.from_json_dict(body))
        except SystemExit:
            pass  # absent list just means nothing revoked yet
    verdict = verify_claim(parsed, store, lists, int(time.time()))
    ctx.emit({"claim_id": parsed.claim_id, "verdict": verdict.value},
             [f"{parsed.claim_id}: {verdict.value}"])
    if verdict.value != "VALID":
        sys.exit(EXIT_DOMAIN_ERROR)


@claim.command("init-list")
@click.option("--issuer-key", "key_file", required=True, type=click.Path(exists=True))
@click.option("--list-id", default="main")
@click.option("--size-bits", type=int, default=1024)
@click.pass_obj
def init_list(ctx: Ctx, key_file, list_id, size_bits):
    """Publish a fresh all-zeros status list for a locally held issuer key."""
    import time

    from nanda.credentials.status_list import new_status_list

    key = load_key(key_file)
    issuer = did_for_public_key(key.public_bytes)
    status_list = new_status_list(
        issuer, list_id, key, now=int(time.time()), size_bits=size_bits
    )
    payload = request_or_die(
        ctx, "PUT", f"/status-lists/{issuer}/{list_id}", json=status_list.to_json_dict()
    )
    ctx.emit(payload, [f"published {issuer}/{list_id} ({payload['bits']} bits)"])


@claim.command("revoke")
@click.option("--issuer-key", "key_file", required=True, type=click.Path(exists=True))
@click.option("--list-id", default="main")
@click.option("--index", type=int, required=True)
@click.pass_obj
def revoke_cmd(ctx: Ctx, key_file, list_id, index):
    """Set a revocation bit and publish the re-signed list to the service."""
    import time

    key = load_key(key_file)
    issuer = did_for_public_key(key.public_bytes)
    body = request_or_die(ctx, "GET", f"/status-lists/{issuer}/{list_id}")
    current = StatusList.from_json_dict(body)
    try:
        updated = revoke(current, index, key, now=int(time.time()))
    except DomainError as err:
        die_domain(err)
        return
    payload = request_or_die(
        ctx, "PUT", f"/status-lists/{issuer}/{list_id}", json=updated.to_json_dict()
    )
    ctx.emit(payload, [f"revoked index {index} on {issuer}/{list_id}"])


# -- handshake ---------------------------------------------------------------------


@cli.command()
@click.option("--initiator", required=True)
@click.option("--target", required=True)
@click.option("--initiator-key", "initiator_key_file", required=True,
              type=click.Path(exists=True))
@click.option("--target-key", "target_key_file", required=True, type=click.Path(exists=True))
@click.option("--policy", "policy_json", default=None, help="Initiator-side policy JSON.")
@click.option("--target-policy", "target_policy_json", default=None)
@click.pass_obj
def handshake(ctx: Ctx, initiator, target, initiator_key_file, target_key_file,
              policy_json, target_policy_json):
    """Drive a bilateral handshake through the service, both directions.

    This is a simulation harness: it holds both agents' keys and answers
    each side's challenge, which is exactly what two cooperating agent
    runtimes would do for themselves.
    """
    from nanda.ztaa.handshake import challenge_message

    keys = {
        initiator: load_key(initiator_key_file),
        target: load_key(target_key_file),
    }
    policies = {
        initiator: json.loads(policy_json) if policy_json else None,
        target: json.loads(target_policy_json) if target_policy_json else None,
    }

    def initiate(side_initiator: str, side_target: str) -> dict:
        body = {"initiator": side_initiator, "target": side_target}
        if policies[side_initiator]:
            body["policy"] = policies[side_initiator]
        return request_or_die(ctx, "POST", "/handshake/initiate", json=body)["session"]

    def respond(session: dict, event: dict) -> dict:
        return request_or_die(
            ctx, "POST", "/handshake/respond",
            json={"session_id": session["session_id"], "event": event},
        )["session"]

    ab = initiate(initiator, target)
    ba = initiate(target, initiator)

    for session, answering_key in ((ab, keys[target]), (ba, keys[initiator])):
        if session["state"] != "CHALLENGE_SENT":
            continue
        message = challenge_message(
            bytes.fromhex(session["nonce_i"]),
            parse_agent_id(session["initiator"]),
            parse_agent_id(session["target"]),
        )
        signature = answering_key.sign(message)
        updated = respond(
            session,
            {
                "kind": "ChallengeResponse",
                "public_key": answering_key.public_bytes.hex(),
                "signature": signature.hex(),
            },
        )
        session.clear()
        session.update(updated)

    for session, peer in ((ab, ba), (ba, ab)):
        if session["state"] != "CHALLENGE_SENT":
            continue
        updated = respond(
            session, {"kind": "PeerVerifiedUs", "confirmed": peer["challenge_verified"]}
        )
        session.clear()
        session.update(updated)

    for session in (ab, ba):
        if session["state"] != "MUTUALLY_AUTHENTICATED":
            continue
        updated = respond(session, {"kind": "PolicyVerdict"})
        session.clear()
        session.update(updated)

    established = ab["state"] == "ESTABLISHED" and ba["state"] == "ESTABLISHED"
    payload = {"established": established, "initiator_session": ab, "target_session": ba}
    lines = [f"outcome: {'ESTABLISHED' if established else 'FAILED'}"]
    for label, session in (("initiator", ab), ("target", ba)):
        lines.append(
            f"{label}: {session['initiator']} -> {session['target']}: {session['state']}"
            + (f" ({session['reject_reason']})" if session.get("reject_reason") else "")
        )
        for entry in session["transcript"]:
            lines.append(f"    {entry['from']} -> {entry['to']}  evidence={entry['evidence'][:16]}")
    ctx.emit(payload, lines)
    if not established:
        reason = ab.get("reject_reason") or ba.get("reject_reason") or ""
        click.echo(f"handshake failed {('with ' + reason) if reason else ''}".strip(), err=True)
        sys.exit(EXIT_DOMAIN_ERROR)


# -- adapter ------------------------------------------------------------------------


@cli.command()
@click.option("--from", "source_dialect",
              type=click.Choice(["mcp", "a2a", "nlweb", "https"]), required=True)
@click.option("--to", "target_dialect",
              type=click.Choice(["mcp", "a2a", "nlweb", "https"]), required=True)
@click.pass_obj
def adapt(ctx: Ctx, source_dialect, target_dialect):
    """Translate a dialect document on stdin to another dialect on stdout."""
    from nanda.adapter.descriptor import Dialect, DialectDoc, bridge

    try:
        body = json.loads(sys.stdin.read())
        source = DialectDoc(dialect=Dialect(source_dialect), body=body)
        translated = bridge(source, Dialect(target_dialect))
    except DomainError as err:
        die_domain(err)
        return
    except ValueError as exc:
        click.echo(f"error: BAD_REQUEST: stdin is not JSON: {exc}", err=True)
        sys.exit(EXIT_DOMAIN_ERROR)
        return
    sys.stdout.write(canonicalize(translated.body).decode("utf-8") + "\n")


# -- AVC --------------------------------------------------------------------------------


@cli.group()
def avc():
    """Visibility and control: history, billing, control, identity."""


@avc.command()
@click.argument("agent")
@click.option("--from", "time_from", type=int, default=None)
@click.option("--to", "time_to", type=int, default=None)
@click.option("--cursor", default=None)
@click.pass_obj
def history(ctx: Ctx, agent, time_from, time_to, cursor):
    """Page through an agent's audit history with chain verification."""
    aid = parse_agent_id(agent)
    params = {}
    if time_from is not None:
        params["from"] = time_from
    if time_to is not None:
        params["to"] = time_to
    if cursor is not None:
        params["cursor"] = cursor
    payload = request_or_die(ctx, "GET", f"/agents/{aid.zone}/{aid.name}/history", params=params)
    lines = [f"chain: {'OK' if payload['chain_ok'] else 'TAMPERED'}"]
    if payload["first_bad_index"] is not None:
        lines[0] += f" (first bad record: {payload['first_bad_index']})"
    for record in payload["records"]:
        lines.append(
            f"  {record['started_at']}..{record['ended_at']} {record['kind']:10}"
            f" {record['outcome']:9} {record['task_name'] or '-'}"
        )
    ctx.emit(payload, lines)


@avc.command()
@click.argument("agent")
@click.option("--from", "time_from", type=int, required=True)
@click.option("--to", "time_to", type=int, required=True)
@click.pass_obj
def billing(ctx: Ctx, agent, time_from, time_to):
    """Billing summary over a period (OK tasks only)."""
    aid = parse_agent_id(agent)
    payload = request_or_die(
        ctx, "GET", f"/agents/{aid.zone}/{aid.name}/billing",
        params={"from": time_from, "to": time_to},
    )
    lines = [
        f"tasks: {payload['task_count']}  total: {payload['total_duration_seconds']}s"
    ]
    for line in payload["lines"]:
        lines.append(
            f"  {line['started_at']}: {line['task_name'] or '-'}"
            f" ({line['duration_seconds']}s)"
        )
    ctx.emit(payload, lines)


@avc.command()
@click.argument("agent")
@click.argument("action", type=click.Choice(["ACTIVATE", "PAUSE", "TERMINATE"]))
@click.pass_obj
def control(ctx: Ctx, agent, action):
    """Activate, pause, or terminate an agent."""
    aid = parse_agent_id(agent)
    payload = request_or_die(
        ctx, "POST", f"/agents/{aid.zone}/{aid.name}/control", json={"action": action}
    )
    ctx.emit(payload, [f"{payload['agent_id']} is now {payload['status']}"])


@avc.command()
@click.argument("agent")
@click.pass_obj
def identity(ctx: Ctx, agent):
    """Complete identity record: DID, ownership, status, risk tier."""
    aid = parse_agent_id(agent)
    payload = request_or_die(ctx, "GET", f"/agents/{aid.zone}/{aid.name}/identity")
    ctx.emit(
        payload,
        [
            f"{payload['agent_id']}  {payload['status']}  v{payload['version']}",
            f"  did: {payload['did']}",
            f"  owner: {payload['owner']}  delegates: {', '.join(payload['delegates']) or '-'}",
            f"  nsa: {payload['nsa']['tier']} (age {payload['nsa']['age_days']}d,"
            f" {payload['nsa']['valid_attestation_count']} attestations)",
        ],
    )


# -- profile -----------------------------------------------------------------------------


@cli.group()
def profile():
    """Store default service URL / token / output format."""


@profile.command("set")
@click.option("--url", default=None)
@click.option("--token", default=None)
@click.option("--output", type=click.Choice(["json", "table"]), default=None)
def profile_set(url, token, output):
    stored = load_profile()
    if url:
        stored["url"] = url
    if token:
        stored["token"] = token
    if output:
        stored["output"] = output
    save_profile(stored)
    click.echo(f"profile written to {profile_path()}")


@profile.command("show")
def profile_show():
    stored = load_profile()
    token = stored.get("token")
    click.echo(f"url: {stored.get('url', '-')}")
    click.echo(f"token: {'***' + token[-4:] if token else '-'}")
    click.echo(f"output: {stored.get('output', '-')}")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.ClickException as err:
        err.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except DomainError as err:
        click.echo(f"error: {err.code}: {err.message}", err=True)
        sys.exit(EXIT_DOMAIN_ERROR)


if __name__ == "__main__":
    main()
