"""The HTTP facade over the registry, discovery, credentials, ZTAA, and AVC.

Startup replays and chain-verifies the event log before any route is
served; a damaged log (beyond a torn final line) aborts the process. Every
route except ``/healthz`` authenticates, and all bodies are canonical JSON.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path
from typing import Any, Optional

from fastapi import Depends, FastAPI, Query, Request
from fastapi.responses import JSONResponse

from nanda.agentfacts.canonical import canonicalize
from nanda.agentfacts.ids import AgentId, parse_agent_id, parse_did
from nanda.agentfacts.model import AgentFactsDoc
from nanda.avc.ledger import AvcLedger, ControlAction
from nanda.avc.records import AuditOutcome, RecordKind
from nanda.credentials.claims import VerifiableClaim, Verdict, verdicts_for, verify_claim
from nanda.credentials.status_list import StatusList, StatusListStore
from nanda.credentials.trust import TrustStore
from nanda.errors import DomainError
from nanda.index_core.clock import Clock, SystemClock
from nanda.index_core.registry import Registry
from nanda.safesearch.engine import run_search
from nanda.safesearch.query import parse_query
from nanda.service.auth import Principal, authenticate
from nanda.service.config import ServiceConfig
from nanda.service.errors import error_response
from nanda.service.ratelimit import RateLimiter
from nanda.ztaa.handshake import (
    ChallengeResponse,
    FactsVerdict,
    HandshakeSession,
    HandshakeState,
    PeerVerifiedUs,
    PolicyVerdict,
    ResolveFail,
    ResolveOk,
    claims_within_policy_depth,
    new_session,
    policy_relevant_claim_ids,
    step,
)
from nanda.ztaa.nsa import assess_nsa
from nanda.ztaa.policy import ZtaaPolicy, evaluate_policy


class CanonicalJSONResponse(JSONResponse):
    media_type = "application/json"

    def render(self, content: Any) -> bytes:
        return canonicalize(content)


class ServiceState:
    """Everything the handlers share; one instance per app."""

    def __init__(self, config: ServiceConfig, clock: Optional[Clock] = None):
        self.config = config
        self.clock = clock or SystemClock()
        config.data_dir.mkdir(parents=True, exist_ok=True)
        self.registry = Registry(
            config.event_log_path,
            clock=self.clock,
            sync=config.log_sync,
            recover_torn_tail=True,
        )
        self.ledger = AvcLedger(self.registry, admin_principals=config.admin_principals)
        self.trust_store = self._load_trust_store()
        self.status_lists = self._load_status_lists()
        self.rate_limiter = RateLimiter(
            config.rate_limit_capacity, config.rate_limit_refill_per_sec
        )
        self.sessions: dict[str, tuple[HandshakeSession, ZtaaPolicy]] = {}
        self._session_lock = threading.Lock()
        self._verify_cache: dict[tuple[int, bytes], Verdict] = {}
        self._revocation_generation = 0
        self._writes_since_snapshot = 0

    def _load_trust_store(self) -> TrustStore:
        directory = self.config.trust_store_dir
        if directory is not None and Path(directory).is_dir():
            return TrustStore.load(Path(directory), self.config.local_zone)
        return TrustStore(local_zone_id=self.config.local_zone)

    def _load_status_lists(self) -> StatusListStore:
        store = StatusListStore()
        directory = self.config.status_list_dir
        if directory.is_dir():
            import json as _json

            for path in sorted(directory.glob("*.json")):
                store.put(StatusList.from_json_dict(_json.loads(path.read_text("utf-8"))))
        return store

    def persist_status_list(self, status_list: StatusList) -> None:
        directory = self.config.status_list_dir
        directory.mkdir(parents=True, exist_ok=True)
        digest = hashlib.sha256(
            f"{status_list.issuer}/{status_list.list_id}".encode()
        ).hexdigest()[:16]
        path = directory / f"{digest}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(canonicalize(status_list.to_json_dict()) + b"\n")
        tmp.replace(path)
        self._revocation_generation += 1
        self._verify_cache.clear()

    def verdict(self, claim: VerifiableClaim) -> Verdict:
        key = (self._revocation_generation, canonicalize(claim.to_json_dict()))
        cached = self._verify_cache.get(key)
        if cached is None:
            cached = verify_claim(claim, self.trust_store, self.status_lists, self.clock.now())
            self._verify_cache[key] = cached
        return cached

    def valid_claims_by_agent(self, docs: list[AgentFactsDoc]) -> dict[str, list]:
        return {
            doc.agent_id.urn: [c for c in doc.claims if self.verdict(c) is Verdict.VALID]
            for doc in docs
        }

    def maybe_snapshot(self) -> None:
        if self.config.snapshot_every <= 0:
            return
        self._writes_since_snapshot += 1
        if self._writes_since_snapshot >= self.config.snapshot_every:
            self.registry.write_snapshot(self.config.snapshot_path)
            self._writes_since_snapshot = 0


def create_app(config: ServiceConfig, *, clock: Optional[Clock] = None) -> FastAPI:
    state = ServiceState(config, clock=clock)
    app = FastAPI(default_response_class=CanonicalJSONResponse, docs_url=None, redoc_url=None)
    app.state.nanda = state

    @app.exception_handler(DomainError)
    async def domain_error_handler(_request: Request, err: DomainError):
        status, body = error_response(err)
        return CanonicalJSONResponse(body, status_code=status)

    from fastapi.exceptions import RequestValidationError

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(_request: Request, err: RequestValidationError):
        status, body = error_response(
            DomainError("BAD_VALUE", "request parameters failed validation")
        )
        return CanonicalJSONResponse(body, status_code=status)

    async def principal_of(request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        token = header[7:] if header.lower().startswith("bearer ") else None
        principal = authenticate(token, config, state.clock.now())
        if not state.rate_limiter.allow(principal.principal_id):
            raise DomainError("RATE_LIMITED", "per-principal rate limit exceeded")
        return principal

    async def body_of(request: Request) -> dict:
        try:
            parsed = await request.json()
        except ValueError as exc:
            raise DomainError("BAD_REQUEST", f"body is not JSON: {exc}") from exc
        if not isinstance(parsed, dict):
            raise DomainError("BAD_REQUEST", "body must be a JSON object")
        return parsed

    def agent_id_of(zone: str, name: str) -> AgentId:
        return parse_agent_id(f"agent://{zone}/{name}")

    def require_owner_or_admin(principal: Principal, agent_id: AgentId) -> None:
        ownership = state.registry.ownership(agent_id)
        if principal.is_admin or ownership.may_write(principal.principal_id):
            return
        raise DomainError("NOT_AUTHORIZED", "owner, delegate, or admin access required")

    # -- liveness (the one unauthenticated route) --------------------------------

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "events": len(state.registry.events())}

    # -- registry CRUD -------------------------------------------------------------

    @app.post("/agents", status_code=201)
    async def register_agent(
        request: Request, principal: Principal = Depends(principal_of)
    ):
        body = await body_of(request)
        doc = AgentFactsDoc.from_json_dict(body.get("doc", body))
        agent_id = state.registry.register(doc, principal.principal_id)
        state.maybe_snapshot()
        return {"agent_id": agent_id.urn, "version": 1}

    @app.get("/agents")
    async def list_agents(principal: Principal = Depends(principal_of)):
        docs = state.registry.list_docs()
        enriched = []
        for doc in docs:
            claims = [c for c in doc.claims if state.verdict(c) is Verdict.VALID]
            assessment = assess_nsa(doc, claims, state.clock.now(), config.nsa)
            from nanda.safesearch.scoring import aggregate_reputation

            enriched.append(
                {
                    "doc": doc.to_json_dict(),
                    "nsa": assessment.to_json_dict(),
                    "aggregated_reputation": aggregate_reputation(claims),
                    "owner": state.registry.ownership(doc.agent_id).owner,
                }
            )
        return {"agents": enriched}

    @app.get("/agents/{zone}/{name}")
    async def get_agent(zone: str, name: str, principal: Principal = Depends(principal_of)):
        doc = state.registry.get(agent_id_of(zone, name))
        return {"doc": doc.to_json_dict()}

    @app.put("/agents/{zone}/{name}")
    async def update_agent(
        zone: str, name: str, request: Request, principal: Principal = Depends(principal_of)
    ):
        body = await body_of(request)
        agent_id = agent_id_of(zone, name)
        doc = AgentFactsDoc.from_json_dict(body.get("doc", body))
        version = state.registry.update(agent_id, doc, principal.principal_id)
        state.maybe_snapshot()
        return {"agent_id": agent_id.urn, "version": version}

    @app.delete("/agents/{zone}/{name}")
    async def delete_agent(
        zone: str, name: str, principal: Principal = Depends(principal_of)
    ):
        agent_id = agent_id_of(zone, name)
        state.registry.delete(agent_id, principal.principal_id)
        state.maybe_snapshot()
        return {"agent_id": agent_id.urn, "status": "TERMINATED"}

    # -- resolution and discovery -----------------------------------------------------

    @app.get("/resolve")
    async def resolve(name: str, principal: Principal = Depends(principal_of)):
        result = state.registry.resolve(parse_agent_id(name))
        return result.to_json_dict()

    @app.get("/search")
    async def search(request: Request, principal: Principal = Depends(principal_of)):
        raw_query = request.url.query
        explain = False
        kept: list[str] = []
        for part in raw_query.split("&") if raw_query else []:
            if part.startswith("explain="):
                explain = part == "explain=true"
            elif part:
                kept.append(part)
        query = parse_query("&".join(kept))
        docs = state.registry.list_docs()
        valid = state.valid_claims_by_agent(docs)
        results, excluded = run_search(
            docs, query, valid, state.clock.now(),
            nsa_config=config.nsa, collect_exclusions=explain,
        )
        payload: dict = {
            "query": query.to_json_dict(),
            "results": [r.to_json_dict() for r in results],
        }
        if explain:
            payload["excluded"] = excluded
        return payload

    # -- status lists ------------------------------------------------------------------

    @app.get("/status-lists/{issuer}/{list_id}")
    async def get_status_list(
        issuer: str, list_id: str, principal: Principal = Depends(principal_of)
    ):
        status_list = state.status_lists.get(parse_did(issuer), list_id)
        if status_list is None:
            raise DomainError("NOT_FOUND", f"no status list {issuer}/{list_id}")
        return status_list.to_json_dict()

    @app.put("/status-lists/{issuer}/{list_id}")
    async def put_status_list(
        issuer: str, list_id: str, request: Request,
        principal: Principal = Depends(principal_of),
    ):
        body = await body_of(request)
        status_list = StatusList.from_json_dict(body)
        issuer_did = parse_did(issuer)
        if status_list.issuer != issuer_did or status_list.list_id != list_id:
            raise DomainError("BAD_VALUE", "status list does not match the URL")
        issuer_key = _issuer_key_bytes(state, issuer_did)
        if issuer_key is None or not status_list.verify(issuer_key):
            raise DomainError("SIGNER_MISMATCH", "status list signature does not verify")
        state.status_lists.put(status_list)
        state.persist_status_list(status_list)
        return {"issuer": issuer, "list_id": list_id, "bits": len(status_list.bits) * 8}

    # -- handshake brokering --------------------------------------------------------------

    @app.post("/handshake/initiate")
    async def handshake_initiate(
        request: Request, principal: Principal = Depends(principal_of)
    ):
        body = await body_of(request)
        initiator = parse_agent_id(str(body.get("initiator", "")))
        target = parse_agent_id(str(body.get("target", "")))
        policy = (
            ZtaaPolicy.from_json_dict(body["policy"])
            if isinstance(body.get("policy"), dict)
            else config.default_policy
        )
        session = new_session(initiator, target)
        now = state.clock.now()
        try:
            resolution = state.registry.resolve(target)
            session = step(session, ResolveOk(resolution.to_json_dict()), now=now)
        except DomainError as err:
            session = step(session, ResolveFail(err.code), now=now)
        if session.state is HandshakeState.RESOLVED:
            target_doc = state.registry.get(target)
            verdicts = verdicts_for(
                target_doc.claims, state.trust_store, state.status_lists, now
            )
            relevant = policy_relevant_claim_ids(target_doc, policy)
            session = step(
                session, FactsVerdict(verdicts=verdicts, policy_relevant=relevant), now=now
            )
        with state._session_lock:
            state.sessions[session.session_id] = (session, policy)
        return {"session": session.to_json_dict()}

    @app.post("/handshake/respond")
    async def handshake_respond(
        request: Request, principal: Principal = Depends(principal_of)
    ):
        body = await body_of(request)
        session_id = str(body.get("session_id", ""))
        with state._session_lock:
            stored = state.sessions.get(session_id)
        if stored is None:
            raise DomainError("NOT_FOUND", f"no handshake session {session_id}")
        session, policy = stored
        event_body = body.get("event")
        if not isinstance(event_body, dict) or "kind" not in event_body:
            raise DomainError("BAD_REQUEST", "event must be an object with a kind")
        now = state.clock.now()
        event = _parse_session_event(state, session, policy, event_body, now)
        session = step(session, event, now=now)
        if (
            isinstance(event, PolicyVerdict)
            and session.state is HandshakeState.ESTABLISHED
            and event.decision.log_required
        ):
            state.ledger.append_task(
                session.target,
                task_name="ztaa.allow_with_log",
                started_at=now,
                ended_at=now,
                outcome=AuditOutcome.OK,
                actor=principal.principal_id,
                kind=RecordKind.POLICY_LOG,
            )
        with state._session_lock:
            state.sessions[session_id] = (session, policy)
        return {"session": session.to_json_dict()}

    # -- AVC --------------------------------------------------------------------------------

    @app.get("/agents/{zone}/{name}/identity")
    async def agent_identity(
        zone: str, name: str, principal: Principal = Depends(principal_of)
    ):
        agent_id = agent_id_of(zone, name)
        require_owner_or_admin(principal, agent_id)
        doc = state.registry.get(agent_id)
        ownership = state.registry.ownership(agent_id)
        claims = [c for c in doc.claims if state.verdict(c) is Verdict.VALID]
        assessment = assess_nsa(doc, claims, state.clock.now(), config.nsa)
        return {
            "agent_id": doc.agent_id.urn,
            "did": str(doc.did),
            "owner": ownership.owner,
            "delegates": sorted(ownership.delegates),
            "status": doc.status.value,
            "version": doc.version,
            "registered_at": doc.registered_at,
            "nsa": assessment.to_json_dict(),
        }

    @app.get("/agents/{zone}/{name}/history")
    async def agent_history(
        zone: str,
        name: str,
        principal: Principal = Depends(principal_of),
        time_from: Optional[int] = Query(None, alias="from"),
        time_to: Optional[int] = Query(None, alias="to"),
        cursor: Optional[str] = None,
        page_size: int = 100,
    ):
        agent_id = agent_id_of(zone, name)
        require_owner_or_admin(principal, agent_id)
        if not 1 <= page_size <= 1000:
            raise DomainError("BAD_VALUE", "page_size must be in [1, 1000]")
        page = state.ledger.history(
            agent_id, time_from=time_from, time_to=time_to, cursor=cursor, page_size=page_size
        )
        return page.to_json_dict()

    @app.get("/agents/{zone}/{name}/billing")
    async def agent_billing(
        zone: str,
        name: str,
        principal: Principal = Depends(principal_of),
        time_from: int = Query(0, alias="from"),
        time_to: int = Query(2**53 - 1, alias="to"),
    ):
        agent_id = agent_id_of(zone, name)
        require_owner_or_admin(principal, agent_id)
        summary = state.ledger.billing_summary(
            agent_id, period_from=time_from, period_to=time_to
        )
        return summary.to_json_dict()

    @app.post("/agents/{zone}/{name}/control")
    async def agent_control(
        zone: str, name: str, request: Request, principal: Principal = Depends(principal_of)
    ):
        body = await body_of(request)
        try:
            action = ControlAction(str(body.get("action", "")))
        except ValueError:
            raise DomainError("BAD_VALUE", "action must be ACTIVATE, PAUSE, or TERMINATE")
        agent_id = agent_id_of(zone, name)
        new_status = state.ledger.control(agent_id, action, principal.principal_id)
        state.maybe_snapshot()
        return {"agent_id": agent_id.urn, "status": new_status.value}

    return app


def _issuer_key_bytes(state: ServiceState, issuer) -> Optional[bytes]:
    found = state.trust_store.find_issuer(issuer)
    if found is not None:
        return found[1].public_key
    return None


def _parse_session_event(
    state: ServiceState,
    session: HandshakeSession,
    policy: ZtaaPolicy,
    body: dict,
    now: int,
):
    kind = body["kind"]
    if kind == "ChallengeResponse":
        try:
            return ChallengeResponse(
                public_key=bytes.fromhex(str(body["public_key"])),
                signature=bytes.fromhex(str(body["signature"])),
            )
        except (KeyError, ValueError) as exc:
            raise DomainError("BAD_REQUEST", f"bad challenge response: {exc}") from exc
    if kind == "PeerVerifiedUs":
        return PeerVerifiedUs(confirmed=bool(body.get("confirmed", False)))
    if kind == "PolicyVerdict":
        target_doc = state.registry.get(session.target)
        verdicts = verdicts_for(target_doc.claims, state.trust_store, state.status_lists, now)
        usable = claims_within_policy_depth(target_doc, verdicts, state.trust_store, policy)
        nsa = assess_nsa(target_doc, usable, now, state.config.nsa)
        decision = evaluate_policy(target_doc, usable, nsa, policy)
        return PolicyVerdict(decision=decision)
    raise DomainError("BAD_REQUEST", f"unsupported event kind {kind!r}")
