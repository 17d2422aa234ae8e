/**
 * One store, one update path.
 *
 * Every mutation flows through `update`, which applies the change and
 * re-renders through the single subscriber, so concurrent API responses
 * serialize and the DOM always reflects exactly one coherent state. Nothing
 * here invents data: state holds server payloads verbatim plus pure UI
 * concerns (which screen, which banner).
 */

import type {
  BillingSummary,
  ConsoleSession,
  HistoryPage,
  IdentityRecord,
  InventoryRow,
  SearchResult,
} from "./api.js";

export type Screen = "login" | "inventory" | "detail";

export interface DetailState {
  agentId: string;
  identity: IdentityRecord | null;
  history: HistoryPage | null;
  billing: BillingSummary | null;
  pendingAction: string | null;
  confirmingTerminate: boolean;
  actionError: string | null;
}

export interface AppState {
  screen: Screen;
  session: ConsoleSession | null;
  loginError: string | null;
  banner: string | null;
  agents: InventoryRow[];
  filter: string;
  searchResults: SearchResult[] | null;
  detail: DetailState | null;
}

export function initialState(): AppState {
  return {
    screen: "login",
    session: null,
    loginError: null,
    banner: null,
    agents: [],
    filter: "",
    searchResults: null,
    detail: null,
  };
}

export type Listener = (state: AppState) => void;

export class Store {
  private state: AppState = initialState();
  private listener: Listener | null = null;

  subscribe(listener: Listener): void {
    this.listener = listener;
    listener(this.state);
  }

  get(): AppState {
    return this.state;
  }

  update(mutate: (state: AppState) => void): void {
    mutate(this.state);
    this.listener?.(this.state);
  }

  /** Drop to the login screen discarding everything session-scoped. */
  resetToLogin(message: string | null): void {
    this.update((state) => {
      state.screen = "login";
      state.session = null;
      state.loginError = message;
      state.agents = [];
      state.searchResults = null;
      state.detail = null;
      state.banner = null;
    });
  }
}
