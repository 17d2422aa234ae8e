/**
 * Pure DOM rendering. Every value shown comes straight from a server
 * payload held in the store; these functions format, they never compute.
 */

import type { AuditRecord, BillingSummary, InventoryRow, SearchResult } from "./api.js";
import type { AppState } from "./state.js";

export interface Actions {
  login(url: string, token: string, refreshSeconds: number): void;
  applyFilter(filter: string): void;
  openDetail(agentId: string): void;
  backToInventory(): void;
  control(agentId: string, action: "ACTIVATE" | "PAUSE" | "TERMINATE"): void;
  requestTerminate(agentId: string): void;
  cancelTerminate(): void;
  confirmTerminate(agentId: string): void;
  retry(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

function formatTime(seconds: number): string {
  return new Date(seconds * 1000).toISOString().replace(".000Z", "Z");
}

export function render(state: AppState, actions: Actions): HTMLElement {
  const root = el("div", { class: "console" });
  if (state.banner) {
    const banner = el("div", { class: "banner", "data-testid": "banner" }, [state.banner]);
    const retry = el("button", { "data-testid": "retry" }, ["retry"]);
    retry.addEventListener("click", () => actions.retry());
    banner.append(retry);
    root.append(banner);
  }
  switch (state.screen) {
    case "login":
      root.append(renderLogin(state, actions));
      break;
    case "inventory":
      root.append(renderInventory(state, actions));
      break;
    case "detail":
      root.append(renderDetail(state, actions));
      break;
  }
  return root;
}

function renderLogin(state: AppState, actions: Actions): HTMLElement {
  const form = el("form", { class: "login", "data-testid": "login" });
  const url = el("input", {
    name: "url",
    placeholder: "service url",
    value: "http://127.0.0.1:8470",
    "data-testid": "login-url",
  });
  const token = el("input", {
    name: "token",
    type: "password",
    placeholder: "admin token",
    "data-testid": "login-token",
  });
  const refresh = el("input", { name: "refresh", value: "10", "data-testid": "login-refresh" });
  const submit = el("button", { type: "submit" }, ["connect"]);
  form.append(el("h1", {}, ["agent operations console"]), url, token, refresh, submit);
  if (state.loginError) {
    form.append(el("div", { class: "error", "data-testid": "login-error" }, [state.loginError]));
  }
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    actions.login(url.value.trim(), token.value, Number(refresh.value) || 10);
  });
  return form;
}

function statusBadge(status: string): HTMLElement {
  return el(
    "span",
    { class: `badge status-${status.toLowerCase()}`, "data-testid": "status-badge" },
    [status],
  );
}

function reputationText(reputation: number | null): string {
  return reputation === null ? "—" : String(reputation);
}

function renderInventory(state: AppState, actions: Actions): HTMLElement {
  const page = el("div", { class: "inventory", "data-testid": "inventory" });
  page.append(el("h1", {}, ["agents"]));

  const filterForm = el("form", { class: "filter" });
  const filterBox = el("input", {
    name: "filter",
    placeholder: "search filters, e.g. exclude_flags=political&capability=education",
    value: state.filter,
    "data-testid": "filter-box",
  });
  const apply = el("button", { type: "submit" }, ["filter"]);
  filterForm.append(filterBox, apply);
  filterForm.addEventListener("submit", (event) => {
    event.preventDefault();
    actions.applyFilter(filterBox.value.trim());
  });
  page.append(filterForm);

  const table = el("table", { "data-testid": "agent-table" });
  table.append(
    el("thead", {}, [
      el("tr", {}, [
        el("th", {}, ["agent"]),
        el("th", {}, ["did"]),
        el("th", {}, ["owner"]),
        el("th", {}, ["status"]),
        el("th", {}, ["nsa tier"]),
        el("th", {}, ["reputation"]),
      ]),
    ]),
  );
  const body = el("tbody");

  if (state.searchResults !== null) {
    const byId = new Map(state.agents.map((row) => [row.doc.agent_id, row]));
    for (const hit of state.searchResults) {
      body.append(searchRow(hit, byId.get(hit.agent_id), actions));
    }
  } else {
    for (const row of state.agents) {
      body.append(inventoryRow(row, actions));
    }
  }
  table.append(body);
  page.append(table);
  return page;
}

function agentLink(agentId: string, actions: Actions): HTMLElement {
  const link = el("a", { href: `#/agents/${agentId}`, "data-testid": "agent-link" }, [agentId]);
  link.addEventListener("click", (event) => {
    event.preventDefault();
    actions.openDetail(agentId);
  });
  return link;
}

function inventoryRow(row: InventoryRow, actions: Actions): HTMLElement {
  return el("tr", { class: "agent-row", "data-testid": "agent-row" }, [
    el("td", {}, [agentLink(row.doc.agent_id, actions)]),
    el("td", { "data-testid": "cell-did" }, [row.doc.did]),
    el("td", { "data-testid": "cell-owner" }, [row.owner]),
    el("td", {}, [statusBadge(row.doc.status)]),
    el("td", { "data-testid": "cell-tier" }, [row.nsa.tier]),
    el("td", { "data-testid": "cell-reputation" }, [
      reputationText(row.aggregated_reputation),
    ]),
  ]);
}

function searchRow(
  hit: SearchResult,
  inventory: InventoryRow | undefined,
  actions: Actions,
): HTMLElement {
  return el("tr", { class: "agent-row", "data-testid": "agent-row" }, [
    el("td", {}, [agentLink(hit.agent_id, actions)]),
    el("td", { "data-testid": "cell-did" }, [inventory?.doc.did ?? ""]),
    el("td", { "data-testid": "cell-owner" }, [inventory?.owner ?? ""]),
    el("td", {}, [statusBadge(inventory?.doc.status ?? "ACTIVE")]),
    el("td", { "data-testid": "cell-tier" }, [hit.nsa_tier]),
    el("td", { "data-testid": "cell-reputation" }, [
      reputationText(hit.aggregated_reputation),
    ]),
  ]);
}

const LEGAL_ACTIONS: Record<string, ("ACTIVATE" | "PAUSE" | "TERMINATE")[]> = {
  ACTIVE: ["PAUSE", "TERMINATE"],
  PAUSED: ["ACTIVATE", "TERMINATE"],
  TERMINATED: [],
};

function renderDetail(state: AppState, actions: Actions): HTMLElement {
  const detail = state.detail;
  const page = el("div", { class: "detail", "data-testid": "detail" });
  if (!detail) {
    return page;
  }
  const back = el("button", { "data-testid": "back" }, ["← agents"]);
  back.addEventListener("click", () => actions.backToInventory());
  page.append(back);

  const identity = detail.identity;
  if (identity) {
    page.append(
      el("h1", {}, [identity.agent_id]),
      el("div", { class: "identity", "data-testid": "identity" }, [
        el("div", {}, ["did: ", el("code", { "data-testid": "identity-did" }, [identity.did])]),
        el("div", {}, [
          "owner: ",
          el("span", { "data-testid": "identity-owner" }, [identity.owner]),
          identity.delegates.length
            ? ` (delegates: ${identity.delegates.join(", ")})`
            : "",
        ]),
        el("div", {}, ["status: ", statusBadge(identity.status)]),
        el("div", { "data-testid": "identity-nsa" }, [
          `nsa: ${identity.nsa.tier} — ${identity.nsa.age_days}d, `,
          `${identity.nsa.valid_attestation_count} attestations`,
        ]),
        el("div", {}, [`registered: ${formatTime(identity.registered_at)}`]),
      ]),
    );

    const panel = el("div", { class: "controls", "data-testid": "control-panel" });
    for (const action of LEGAL_ACTIONS[identity.status] ?? []) {
      const button = el(
        "button",
        { "data-testid": `control-${action.toLowerCase()}` },
        [action.toLowerCase()],
      );
      if (detail.pendingAction !== null) {
        button.setAttribute("disabled", "disabled");
      }
      button.addEventListener("click", () => {
        if (action === "TERMINATE") {
          actions.requestTerminate(identity.agent_id);
        } else {
          actions.control(identity.agent_id, action);
        }
      });
      panel.append(button);
    }
    page.append(panel);

    if (detail.confirmingTerminate) {
      const dialog = el("div", { class: "confirm", "data-testid": "confirm-terminate" }, [
        el("p", {}, [
          `Terminate ${identity.agent_id}? This is permanent; the agent `,
          "never resolves or matches searches again.",
        ]),
      ]);
      const yes = el("button", { "data-testid": "confirm-yes" }, ["terminate"]);
      yes.addEventListener("click", () => actions.confirmTerminate(identity.agent_id));
      const no = el("button", { "data-testid": "confirm-no" }, ["cancel"]);
      no.addEventListener("click", () => actions.cancelTerminate());
      dialog.append(yes, no);
      page.append(dialog);
    }

    if (detail.actionError) {
      page.append(
        el("div", { class: "error", "data-testid": "action-error" }, [detail.actionError]),
      );
    }
  }

  if (detail.history) {
    page.append(renderHistory(detail.history.chain_ok, detail.history.first_bad_index,
                              detail.history.records));
  }
  if (detail.billing) {
    page.append(renderBilling(detail.billing));
  }
  return page;
}

function renderHistory(
  chainOk: boolean,
  firstBad: number | null,
  records: AuditRecord[],
): HTMLElement {
  const section = el("div", { class: "history", "data-testid": "history" });
  const badge = el(
    "span",
    {
      class: `badge chain-${chainOk ? "ok" : "tampered"}`,
      "data-testid": "chain-badge",
    },
    [chainOk ? "chain verified" : `chain TAMPERED${firstBad === null ? "" : ` @ ${firstBad}`}`],
  );
  section.append(el("h2", {}, ["task history ", badge]));
  const list = el("ol", { class: "timeline", "data-testid": "timeline" });
  for (const record of records) {
    list.append(
      el("li", { "data-testid": "timeline-entry" }, [
        el("span", { class: "when" }, [formatTime(record.started_at)]),
        ` ${record.kind} `,
        el("span", { class: "task" }, [record.task_name ?? "—"]),
        ` ${record.outcome} (${record.ended_at - record.started_at}s)`,
      ]),
    );
  }
  section.append(list);
  return section;
}

function renderBilling(billing: BillingSummary): HTMLElement {
  const section = el("div", { class: "billing", "data-testid": "billing" });
  section.append(
    el("h2", {}, ["billing"]),
    el("div", {}, [
      "tasks: ",
      el("span", { "data-testid": "billing-count" }, [String(billing.task_count)]),
      "  total: ",
      el("span", { "data-testid": "billing-total" }, [
        String(billing.total_duration_seconds),
      ]),
      "s",
    ]),
  );
  const list = el("ul");
  for (const line of billing.lines) {
    list.append(
      el("li", { "data-testid": "billing-line" }, [
        `${line.task_name ?? "—"}: ${line.duration_seconds}s`,
      ]),
    );
  }
  section.append(list);
  return section;
}
