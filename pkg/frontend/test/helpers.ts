import type { SearchHit } from "../src/api.js";

/** Minimal Response stand-ins; the client only touches ok/status/json(). */
export const ok = (body: unknown) =>
  ({ ok: true, status: 200, json: async () => body }) as unknown as Response;

export const httpError = (status: number, body: unknown) =>
  ({ ok: false, status, json: async () => body }) as unknown as Response;

export const nonJson = (status: number) =>
  ({
    ok: false,
    status,
    json: async () => {
      throw new SyntaxError("not json");
    },
  }) as unknown as Response;

export function hit(id: number, code: string, score: number, rank: number): SearchHit {
  return { id, code, score, rank };
}

export function searchBody(results: SearchHit[]) {
  return { v: 1, query: "", results };
}

/** Drain pending microtasks (fetch mocks resolve without macrotask timers). */
export async function flush(times = 4): Promise<void> {
  for (let i = 0; i < times; i++) await Promise.resolve();
}

export function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (reason: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}
