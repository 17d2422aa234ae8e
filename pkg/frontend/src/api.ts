/**
 * Typed client for the registry service REST API.
 *
 * The console displays what the service returns and computes nothing the
 * service also computes, so these types mirror the wire payloads exactly.
 * The bearer token lives in this object in memory and nowhere else; it is
 * never written to any kind of browser storage.
 */

export interface ConsoleSession {
  serviceUrl: string;
  token: string;
  refreshSeconds: number;
}

export interface EndpointInfo {
  protocol: string;
  url: string;
  priority: number;
}

export interface AgentDoc {
  agent_id: string;
  did: string;
  owner: string;
  endpoints: EndpointInfo[];
  capabilities: string[];
  content_flags: string[];
  regions: string[];
  registered_at: number;
  status: string;
  version: number;
}

export interface NsaInfo {
  tier: string;
  age_days: number;
  valid_attestation_count: number;
}

export interface InventoryRow {
  doc: AgentDoc;
  nsa: NsaInfo;
  aggregated_reputation: number | null;
  owner: string;
}

export interface SearchResult {
  agent_id: string;
  aggregated_reputation: number | null;
  matched_certs: string[];
  nsa_tier: string;
  registered_at: number;
}

export interface SearchResponse {
  results: SearchResult[];
  excluded?: { agent_id: string; reasons: string[] }[];
}

export interface IdentityRecord {
  agent_id: string;
  did: string;
  owner: string;
  delegates: string[];
  status: string;
  version: number;
  registered_at: number;
  nsa: NsaInfo;
}

export interface AuditRecord {
  agent_id: string;
  record_id: string;
  kind: string;
  task_name: string | null;
  started_at: number;
  ended_at: number;
  outcome: string;
  actor: string;
  prev_hash: string;
  hash: string;
}

export interface HistoryPage {
  records: AuditRecord[];
  next_cursor: string | null;
  chain_ok: boolean;
  first_bad_index: number | null;
}

export interface BillingLine {
  record_id: string;
  task_name: string | null;
  started_at: number;
  ended_at: number;
  duration_seconds: number;
}

export interface BillingSummary {
  task_count: number;
  total_duration_seconds: number;
  lines: BillingLine[];
}

export interface ControlResult {
  agent_id: string;
  status: string;
}

/** Error carrying the service's verbatim machine-readable code. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }

  get isAuthFailure(): boolean {
    return this.status === 401;
  }
}

export class NetworkError extends Error {}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** agent://zone/name -> "zone/name" (the path spelling of an agent id). */
export function agentPath(agentId: string): string {
  return agentId.replace(/^agent:\/\//, "");
}

export class ApiClient {
  constructor(
    private readonly session: ConsoleSession,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = {
      method,
      headers: {
        Authorization: `Bearer ${this.session.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      ...(body !== undefined ? { body: JSON.stringify(body) } : {}),
    };
    let response: Response;
    try {
      response = await this.fetchImpl(this.session.serviceUrl + path, init);
    } catch (err) {
      throw new NetworkError(err instanceof Error ? err.message : String(err));
    }
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const error = (payload as { error?: { code?: string; message?: string } }).error ?? {};
      throw new ApiError(
        response.status,
        error.code ?? `HTTP_${response.status}`,
        error.message ?? response.statusText,
      );
    }
    return payload as T;
  }

  listAgents(): Promise<{ agents: InventoryRow[] }> {
    return this.request("GET", "/agents");
  }

  search(queryString: string): Promise<SearchResponse> {
    return this.request("GET", `/search?${queryString}`);
  }

  identity(agentId: string): Promise<IdentityRecord> {
    return this.request("GET", `/agents/${agentPath(agentId)}/identity`);
  }

  history(agentId: string, range?: { from?: number; to?: number }): Promise<HistoryPage> {
    const params = new URLSearchParams();
    if (range?.from !== undefined) params.set("from", String(range.from));
    if (range?.to !== undefined) params.set("to", String(range.to));
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request("GET", `/agents/${agentPath(agentId)}/history${suffix}`);
  }

  billing(agentId: string, range?: { from?: number; to?: number }): Promise<BillingSummary> {
    const params = new URLSearchParams();
    if (range?.from !== undefined) params.set("from", String(range.from));
    if (range?.to !== undefined) params.set("to", String(range.to));
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request("GET", `/agents/${agentPath(agentId)}/billing${suffix}`);
  }

  control(agentId: string, action: "ACTIVATE" | "PAUSE" | "TERMINATE"): Promise<ControlResult> {
    return this.request("POST", `/agents/${agentPath(agentId)}/control`, { action });
  }
}
