/**
 * Console wiring: session lifecycle, polling refresh, and the action
 * handlers views call into.
 *
 * Server-authoritative by design: a control click sends the request and
 * changes nothing locally; whatever status the server returns is what the
 * next render shows. A 401 anywhere drops to the login screen and discards
 * all session-scoped data.
 */

import { ApiClient, ApiError, NetworkError, type ConsoleSession, type FetchLike } from "./api.js";
import { Store } from "./state.js";
import { render, type Actions } from "./views.js";

export class ConsoleApp {
  readonly store = new Store();
  private client: ApiClient | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly mount: HTMLElement,
    private readonly fetchImpl?: FetchLike,
  ) {
    this.store.subscribe((state) => {
      this.mount.replaceChildren(render(state, this.actions));
    });
  }

  /** Stop polling (tests and teardown). */
  dispose(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private handleFailure(err: unknown): void {
    if (err instanceof ApiError && err.isAuthFailure) {
      this.dispose();
      this.client = null;
      this.store.resetToLogin("session expired: sign in again");
      return;
    }
    if (err instanceof NetworkError) {
      this.store.update((state) => {
        state.banner = "service unreachable";
      });
      return;
    }
    throw err;
  }

  async refreshInventory(): Promise<void> {
    const client = this.client;
    if (!client) return;
    try {
      const inventory = await client.listAgents();
      const filter = this.store.get().filter;
      const search = filter ? await client.search(filter) : null;
      this.store.update((state) => {
        state.agents = inventory.agents;
        state.searchResults = search ? search.results : null;
        state.banner = null;
      });
    } catch (err) {
      this.handleFailure(err);
    }
  }

  async refreshDetail(agentId: string): Promise<void> {
    const client = this.client;
    if (!client) return;
    try {
      const [identity, history, billing] = await Promise.all([
        client.identity(agentId),
        client.history(agentId),
        client.billing(agentId),
      ]);
      this.store.update((state) => {
        if (state.detail?.agentId !== agentId) return;
        state.detail.identity = identity;
        state.detail.history = history;
        state.detail.billing = billing;
        state.banner = null;
      });
    } catch (err) {
      this.handleFailure(err);
    }
  }

  private async refresh(): Promise<void> {
    const state = this.store.get();
    if (state.screen === "inventory") {
      await this.refreshInventory();
    } else if (state.screen === "detail" && state.detail) {
      await this.refreshDetail(state.detail.agentId);
    }
  }

  private startPolling(seconds: number): void {
    this.dispose();
    if (seconds > 0) {
      this.pollTimer = setInterval(() => void this.refresh(), seconds * 1000);
    }
  }

  private async runControl(
    agentId: string,
    action: "ACTIVATE" | "PAUSE" | "TERMINATE",
  ): Promise<void> {
    const client = this.client;
    if (!client) return;
    this.store.update((state) => {
      if (state.detail) {
        state.detail.pendingAction = action;
        state.detail.actionError = null;
        state.detail.confirmingTerminate = false;
      }
    });
    try {
      // The response is the authority; nothing is updated optimistically.
      await client.control(agentId, action);
    } catch (err) {
      if (err instanceof ApiError && !err.isAuthFailure) {
        this.store.update((state) => {
          if (state.detail) {
            state.detail.actionError = `${err.code}: ${err.message}`;
            state.detail.pendingAction = null;
          }
        });
        await this.refreshDetail(agentId);
        return;
      }
      this.handleFailure(err);
      return;
    }
    this.store.update((state) => {
      if (state.detail) state.detail.pendingAction = null;
    });
    await this.refreshDetail(agentId);
  }

  readonly actions: Actions = {
    login: (url, token, refreshSeconds) => {
      const session: ConsoleSession = { serviceUrl: url, token, refreshSeconds };
      const client = new ApiClient(session, this.fetchImpl);
      void (async () => {
        try {
          const inventory = await client.listAgents();
          this.client = client;
          this.store.update((state) => {
            state.session = session;
            state.screen = "inventory";
            state.loginError = null;
            state.agents = inventory.agents;
            state.searchResults = null;
          });
          this.startPolling(refreshSeconds);
        } catch (err) {
          if (err instanceof ApiError) {
            this.store.update((state) => {
              state.loginError = `${err.code}: ${err.message}`;
            });
          } else if (err instanceof NetworkError) {
            this.store.update((state) => {
              state.loginError = "service unreachable";
            });
          } else {
            throw err;
          }
        }
      })();
    },

    applyFilter: (filter) => {
      this.store.update((state) => {
        state.filter = filter;
      });
      void this.refreshInventory();
    },

    openDetail: (agentId) => {
      this.store.update((state) => {
        state.screen = "detail";
        state.detail = {
          agentId,
          identity: null,
          history: null,
          billing: null,
          pendingAction: null,
          confirmingTerminate: false,
          actionError: null,
        };
      });
      void this.refreshDetail(agentId);
    },

    backToInventory: () => {
      this.store.update((state) => {
        state.screen = "inventory";
        state.detail = null;
      });
      void this.refreshInventory();
    },

    control: (agentId, action) => {
      void this.runControl(agentId, action);
    },

    requestTerminate: (agentId) => {
      this.store.update((state) => {
        if (state.detail?.agentId === agentId) {
          state.detail.confirmingTerminate = true;
        }
      });
    },

    cancelTerminate: () => {
      this.store.update((state) => {
        if (state.detail) state.detail.confirmingTerminate = false;
      });
    },

    confirmTerminate: (agentId) => {
      void this.runControl(agentId, "TERMINATE");
    },

    retry: () => {
      void this.refresh();
    },
  };
}
