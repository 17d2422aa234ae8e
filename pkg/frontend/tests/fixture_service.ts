/**
 * In-process stand-in for the registry service: a FetchLike that speaks the
 * documented REST payloads. It plays the server's role (so it owns status
 * transitions and chain verdicts); tests then assert the console reproduces
 * its responses instead of computing anything itself.
 */

import type {
  AuditRecord,
  BillingSummary,
  FetchLike,
  HistoryPage,
  InventoryRow,
  SearchResponse,
} from "../src/api.js";

export interface FixtureAgent {
  row: InventoryRow;
  history: HistoryPage;
  billing: BillingSummary;
  delegates: string[];
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function errorResponse(status: number, code: string, message: string): Response {
  return jsonResponse(status, { error: { code, message } });
}

export function makeAgent(
  name: string,
  status: string,
  overrides: Partial<{
    reputation: number | null;
    tier: string;
    owner: string;
    flags: string[];
  }> = {},
): FixtureAgent {
  const agentId = `agent://fix/${name}`;
  return {
    row: {
      doc: {
        agent_id: agentId,
        did: `did:web:${name}.fix.example`,
        owner: overrides.owner ?? "alice",
        endpoints: [{ protocol: "HTTPS", url: `https://${name}.fix.example/`, priority: 0 }],
        capabilities: ["education.tutoring"],
        content_flags: overrides.flags ?? [],
        regions: ["US"],
        registered_at: 1_750_000_000,
        status,
        version: 1,
      },
      nsa: { tier: overrides.tier ?? "FULL", age_days: 120, valid_attestation_count: 3 },
      aggregated_reputation: overrides.reputation ?? 80,
      owner: overrides.owner ?? "alice",
    },
    history: { records: [], next_cursor: null, chain_ok: true, first_bad_index: null },
    billing: { task_count: 0, total_duration_seconds: 0, lines: [] },
    delegates: [],
  };
}

const LEGAL: Record<string, Record<string, string>> = {
  ACTIVE: { PAUSE: "PAUSED", TERMINATE: "TERMINATED" },
  PAUSED: { ACTIVATE: "ACTIVE", TERMINATE: "TERMINATED" },
  TERMINATED: {},
};

export class FixtureService {
  agents = new Map<string, FixtureAgent>();
  validTokens = new Set(["admin-token"]);
  searchResponse: SearchResponse = { results: [] };
  controlGate: Promise<void> | null = null;
  controlCalls: { agentId: string; action: string }[] = [];
  requestLog: string[] = [];
  forbidControl = false;

  add(agent: FixtureAgent): void {
    this.agents.set(agent.row.doc.agent_id, agent);
  }

  byPath(zoneName: string): FixtureAgent | undefined {
    return this.agents.get(`agent://${zoneName}`);
  }

  readonly fetch: FetchLike = async (url, init) => {
    const parsed = new URL(url);
    const method = init?.method ?? "GET";
    this.requestLog.push(`${method} ${parsed.pathname}${parsed.search}`);

    const header = new Headers(init?.headers).get("authorization") ?? "";
    const token = header.replace(/^Bearer /, "");
    if (!this.validTokens.has(token)) {
      return errorResponse(401, "TOKEN_EXPIRED", "token expired");
    }

    if (parsed.pathname === "/agents" && method === "GET") {
      return jsonResponse(200, { agents: [...this.agents.values()].map((a) => a.row) });
    }
    if (parsed.pathname === "/search" && method === "GET") {
      return jsonResponse(200, this.searchResponse);
    }

    const detail = parsed.pathname.match(
      /^\/agents\/([^/]+\/[^/]+)\/(identity|history|billing|control)$/,
    );
    if (detail) {
      const agent = this.byPath(detail[1]);
      if (!agent) {
        return errorResponse(404, "NOT_FOUND", "no such agent");
      }
      const kind = detail[2];
      if (kind === "identity") {
        const doc = agent.row.doc;
        return jsonResponse(200, {
          agent_id: doc.agent_id,
          did: doc.did,
          owner: agent.row.owner,
          delegates: agent.delegates,
          status: doc.status,
          version: doc.version,
          registered_at: doc.registered_at,
          nsa: agent.row.nsa,
        });
      }
      if (kind === "history") {
        return jsonResponse(200, agent.history);
      }
      if (kind === "billing") {
        return jsonResponse(200, agent.billing);
      }
      // control
      if (this.forbidControl) {
        return errorResponse(403, "NOT_AUTHORIZED", "not authorized");
      }
      const body = init?.body ? JSON.parse(String(init.body)) : {};
      const action = String(body.action ?? "");
      if (this.controlGate) {
        await this.controlGate;
      }
      this.controlCalls.push({ agentId: agent.row.doc.agent_id, action });
      const next = LEGAL[agent.row.doc.status]?.[action];
      if (!next) {
        return errorResponse(
          422,
          "ILLEGAL_TRANSITION",
          `${action} is illegal from ${agent.row.doc.status}`,
        );
      }
      agent.row.doc.status = next;
      return jsonResponse(200, { agent_id: agent.row.doc.agent_id, status: next });
    }

    return errorResponse(404, "NOT_FOUND", `no route ${parsed.pathname}`);
  };
}

export function historyOf(records: Partial<AuditRecord>[], chainOk = true,
                          firstBad: number | null = null): HistoryPage {
  return {
    records: records.map((partial, i) => ({
      agent_id: "agent://fix/worker",
      record_id: `r-${i}`,
      kind: "TASK",
      task_name: `task-${i}`,
      started_at: 1_750_000_000 + i * 100,
      ended_at: 1_750_000_000 + i * 100 + 60,
      outcome: "OK",
      actor: "alice",
      prev_hash: "00".repeat(32),
      hash: "11".repeat(32),
      ...partial,
    })),
    next_cursor: null,
    chain_ok: chainOk,
    first_bad_index: firstBad,
  };
}
