/** Typed client for the search service JSON API (schema "v": 1). */

export interface ModelInfo {
  id: string;
  kind: string;
  ckpt_hash: string;
}

export interface SearchHit {
  id: number;
  code: string;
  score: number;
  rank: number;
}

interface SearchResponse {
  v: number;
  query: string;
  results: SearchHit[];
}

/** Carries the service's machine-readable error code (or a transport label). */
export class ApiError extends Error {
  constructor(readonly code: string) {
    super(`search service error: ${code}`);
    this.name = "ApiError";
  }
}

async function errorCode(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { error?: unknown };
    if (typeof body.error === "string") return body.error;
  } catch {
    // non-JSON error body; fall through to the status label
  }
  return `http_${resp.status}`;
}

export async function fetchModels(base: string): Promise<ModelInfo[]> {
  const resp = await fetch(`${base}/api/models`);
  if (!resp.ok) throw new ApiError(await errorCode(resp));
  const body = (await resp.json()) as { models: ModelInfo[] };
  return body.models;
}

/** Results come back exactly as the service ordered them; never re-sorted. */
export async function fetchResults(
  base: string,
  query: string,
  k: number,
  model?: string,
): Promise<SearchHit[]> {
  const params = new URLSearchParams({ q: query, k: String(k) });
  if (model) params.set("model", model);
  const resp = await fetch(`${base}/api/search?${params.toString()}`);
  if (!resp.ok) throw new ApiError(await errorCode(resp));
  const body = (await resp.json()) as SearchResponse;
  return body.results;
}

/**
 * API base URL: the `?api=` query parameter wins (runtime override), then a
 * `<meta name="codematch-api">` tag (build-time default), then same origin.
 */
export function resolveApiBase(search: string, doc?: Document): string {
  const fromQuery = new URLSearchParams(search).get("api");
  if (fromQuery) return fromQuery.replace(/\/+$/, "");
  const meta = doc
    ?.querySelector('meta[name="codematch-api"]')
    ?.getAttribute("content");
  if (meta) return meta.replace(/\/+$/, "");
  return "";
}
