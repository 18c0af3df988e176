import { afterEach, describe, expect, test, vi } from "vitest";

import { ApiError, fetchModels, fetchResults, resolveApiBase } from "../src/api.js";
import { hit, httpError, nonJson, ok, searchBody } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
  document.head.innerHTML = "";
});

describe("fetchResults", () => {
  test("requests /api/search with q and k and returns hits untouched", async () => {
    const hits = [hit(4, "b", 0.2, 1), hit(1, "a", 0.9, 2)];
    const fetchMock = vi.fn(async (_input: RequestInfo | URL) => ok(searchBody(hits)));
    vi.stubGlobal("fetch", fetchMock);

    const results = await fetchResults("http://svc:9", "merge dicts", 5);

    expect(fetchMock).toHaveBeenCalledTimes(1);
    const url = new URL(String(fetchMock.mock.calls[0]![0]));
    expect(url.origin + url.pathname).toBe("http://svc:9/api/search");
    expect(url.searchParams.get("q")).toBe("merge dicts");
    expect(url.searchParams.get("k")).toBe("5");
    expect(url.searchParams.has("model")).toBe(false);
    // server order is authoritative, even when scores look out of order
    expect(results).toEqual(hits);
  });

  test("includes model param only when given", async () => {
    const fetchMock = vi.fn(async (_input: RequestInfo | URL) => ok(searchBody([])));
    vi.stubGlobal("fetch", fetchMock);

    await fetchResults("", "q", 10, "ct");

    const url = new URL(String(fetchMock.mock.calls[0]![0]), "http://same.origin");
    expect(url.searchParams.get("model")).toBe("ct");
  });

  test("maps a structured 400 body to ApiError with the server code", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => httpError(400, { v: 1, error: "invalid_k" })));

    await expect(fetchResults("", "q", 0)).rejects.toMatchObject({
      name: "ApiError",
      code: "invalid_k",
    });
  });

  test("falls back to http_<status> when the error body is not JSON", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => nonJson(502)));

    const err = await fetchResults("", "q", 3).catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe("http_502");
  });

  test("lets network-level failures propagate untranslated", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => Promise.reject(new TypeError("refused"))));

    await expect(fetchResults("", "q", 3)).rejects.toBeInstanceOf(TypeError);
  });
});

describe("fetchModels", () => {
  test("returns the advertised model list", async () => {
    const models = [{ id: "ct", kind: "ct", ckpt_hash: "abc123" }];
    vi.stubGlobal("fetch", vi.fn(async () => ok({ v: 1, models })));

    expect(await fetchModels("http://svc:9")).toEqual(models);
  });

  test("raises ApiError on failure", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => nonJson(500)));

    await expect(fetchModels("")).rejects.toMatchObject({ code: "http_500" });
  });
});

describe("resolveApiBase", () => {
  test("query param wins over the build-time meta tag", () => {
    document.head.innerHTML = '<meta name="codematch-api" content="http://meta:1">';
    expect(resolveApiBase("?api=http://runtime:2", document)).toBe("http://runtime:2");
  });

  test("meta tag is used when no query param is present", () => {
    document.head.innerHTML = '<meta name="codematch-api" content="http://meta:1">';
    expect(resolveApiBase("", document)).toBe("http://meta:1");
  });

  test("defaults to same-origin (empty base)", () => {
    expect(resolveApiBase("?other=x", document)).toBe("");
  });

  test("strips trailing slashes so path joins stay clean", () => {
    expect(resolveApiBase("?api=http://svc:9//", document)).toBe("http://svc:9");
  });
});
