import { ApiError, type SearchHit, fetchResults } from "./api.js";

/** Everything the view needs; results belong only to the newest request. */
export interface QueryState {
  query: string;
  model: string; // selected model id; "" until /api/models arrives
  k: number;
  loading: boolean;
  results: SearchHit[] | null; // null = nothing searched yet
  error: string | null;
}

export const initialState: QueryState = {
  query: "",
  model: "",
  k: 10,
  loading: false,
  results: null,
  error: null,
};

export type Listener = (state: QueryState) => void;

/** User-facing message for a service error code. */
export function messageFor(code: string): string {
  switch (code) {
    case "missing_query":
    case "empty_query":
      return "type something to search";
    case "invalid_k":
      return "result count must be a positive integer";
    case "unknown_model":
      return "that model is not loaded on the server";
    default:
      return `search failed (${code})`;
  }
}

/**
 * Search state container with a request sequence number. Every search bumps
 * the sequence; a response (success or failure) is applied only while its
 * sequence is still the latest, so a slow earlier response can never
 * overwrite a newer one.
 */
export class SearchStore {
  private state: QueryState = { ...initialState };
  private seq = 0;
  private listeners: Listener[] = [];

  constructor(private readonly base: string) {}

  getState(): QueryState {
    return this.state;
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private set(patch: Partial<QueryState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  setModel(model: string): void {
    this.set({ model });
    if (this.state.query.trim()) void this.search(this.state.query);
  }

  setK(k: number): void {
    this.set({ k });
  }

  /** Surface a failure that happened outside the search flow (model list). */
  announceError(message: string): void {
    this.set({ error: message, loading: false });
  }

  /** Blank queries never hit the network; they reset to the idle state. */
  async search(query: string): Promise<void> {
    const seq = ++this.seq;
    if (!query.trim()) {
      this.set({ query, loading: false, results: null, error: null });
      return;
    }
    this.set({ query, loading: true, error: null });
    try {
      const results = await fetchResults(
        this.base,
        query,
        this.state.k,
        this.state.model || undefined,
      );
      if (seq !== this.seq) return; // stale: superseded by a newer request
      this.set({ loading: false, results, error: null });
    } catch (err) {
      if (seq !== this.seq) return; // stale failures are just as dead
      const message =
        err instanceof ApiError ? messageFor(err.code) : "search service unreachable";
      this.set({ loading: false, results: null, error: message });
    }
  }
}
