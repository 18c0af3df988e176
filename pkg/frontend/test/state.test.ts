import { afterEach, describe, expect, test, vi } from "vitest";

import { SearchStore, initialState, messageFor } from "../src/state.js";
import { deferred, flush, hit, httpError, ok, searchBody } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("messageFor", () => {
  test.each([
    ["missing_query", "type something to search"],
    ["empty_query", "type something to search"],
    ["invalid_k", "result count must be a positive integer"],
    ["unknown_model", "that model is not loaded on the server"],
    ["index_on_fire", "search failed (index_on_fire)"],
  ])("%s -> %s", (code, message) => {
    expect(messageFor(code)).toBe(message);
  });
});

describe("SearchStore", () => {
  test("search sets loading, then applies results in API order", async () => {
    const hits = [hit(7, "z", 0.4, 1), hit(2, "a", 0.9, 2)];
    vi.stubGlobal("fetch", vi.fn(async () => ok(searchBody(hits))));
    const store = new SearchStore("");
    const seen: boolean[] = [];
    store.subscribe((s) => seen.push(s.loading));

    const done = store.search("zip lists");
    expect(store.getState().loading).toBe(true);
    await done;

    expect(store.getState()).toMatchObject({
      query: "zip lists",
      loading: false,
      results: hits,
      error: null,
    });
    expect(seen[0]).toBe(true); // a spinner was visible while in flight
  });

  test("a stale response arriving after a newer request is discarded", async () => {
    const slow = deferred<Response>();
    const fast = deferred<Response>();
    const fetchMock = vi
      .fn<() => Promise<Response>>()
      .mockReturnValueOnce(slow.promise)
      .mockReturnValueOnce(fast.promise);
    vi.stubGlobal("fetch", fetchMock);
    const store = new SearchStore("");

    void store.search("first");
    void store.search("second");
    fast.resolve(ok(searchBody([hit(1, "keep me", 0.8, 1)])));
    await flush();
    expect(store.getState().results).toEqual([hit(1, "keep me", 0.8, 1)]);

    slow.resolve(ok(searchBody([hit(9, "stale", 0.1, 1)])));
    await flush();
    expect(store.getState().results).toEqual([hit(1, "keep me", 0.8, 1)]);
    expect(store.getState().query).toBe("second");
  });

  test("a stale failure cannot clobber newer results either", async () => {
    const slow = deferred<Response>();
    const fast = deferred<Response>();
    const fetchMock = vi
      .fn<() => Promise<Response>>()
      .mockReturnValueOnce(slow.promise)
      .mockReturnValueOnce(fast.promise);
    vi.stubGlobal("fetch", fetchMock);
    const store = new SearchStore("");

    void store.search("first");
    void store.search("second");
    fast.resolve(ok(searchBody([hit(3, "fresh", 0.7, 1)])));
    await flush();

    slow.reject(new TypeError("connection reset"));
    await flush();
    expect(store.getState().error).toBeNull();
    expect(store.getState().results).toEqual([hit(3, "fresh", 0.7, 1)]);
  });

  test("service error codes map to readable messages and clear results", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => httpError(400, { v: 1, error: "unknown_model" })),
    );
    const store = new SearchStore("");

    await store.search("anything");

    expect(store.getState()).toMatchObject({
      loading: false,
      results: null,
      error: "that model is not loaded on the server",
    });
  });

  test("network failures surface as unreachable, not as silence", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => Promise.reject(new TypeError("refused"))));
    const store = new SearchStore("");

    await store.search("anything");

    expect(store.getState().error).toBe("search service unreachable");
  });

  test("blank queries never hit the network and reset to idle", async () => {
    const fetchMock = vi.fn(async () => ok(searchBody([])));
    vi.stubGlobal("fetch", fetchMock);
    const store = new SearchStore("");
    await store.search("real");

    await store.search("   ");

    expect(fetchMock).toHaveBeenCalledTimes(1);
    expect(store.getState()).toMatchObject({
      query: "   ",
      loading: false,
      results: null,
      error: null,
    });
  });

  test("clearing the box supersedes an in-flight request", async () => {
    const slow = deferred<Response>();
    vi.stubGlobal("fetch", vi.fn(() => slow.promise));
    const store = new SearchStore("");

    void store.search("typed then deleted");
    await store.search("");
    slow.resolve(ok(searchBody([hit(5, "late", 0.5, 1)])));
    await flush();

    expect(store.getState().results).toBeNull();
    expect(store.getState().loading).toBe(false);
  });

  test("selecting a model re-runs the current query with that model", async () => {
    const fetchMock = vi.fn(async (_input: RequestInfo | URL) => ok(searchBody([])));
    vi.stubGlobal("fetch", fetchMock);
    const store = new SearchStore("http://svc:9");
    await store.search("flatten list");

    store.setModel("mp-cat");
    await flush();

    expect(fetchMock).toHaveBeenCalledTimes(2);
    const url = new URL(String(fetchMock.mock.calls[1]![0]));
    expect(url.searchParams.get("model")).toBe("mp-cat");
    expect(url.searchParams.get("q")).toBe("flatten list");
  });

  test("selecting a model with no query does not fetch", () => {
    const fetchMock = vi.fn(async () => ok(searchBody([])));
    vi.stubGlobal("fetch", fetchMock);
    const store = new SearchStore("");

    store.setModel("ct");

    expect(fetchMock).not.toHaveBeenCalled();
    expect(store.getState().model).toBe("ct");
  });

  test("setK flows into the next request", async () => {
    const fetchMock = vi.fn(async (_input: RequestInfo | URL) => ok(searchBody([])));
    vi.stubGlobal("fetch", fetchMock);
    const store = new SearchStore("");

    store.setK(25);
    await store.search("q");

    const url = new URL(String(fetchMock.mock.calls[0]![0]), "http://same.origin");
    expect(url.searchParams.get("k")).toBe("25");
  });

  test("announceError is visible and stops any spinner", () => {
    const store = new SearchStore("");

    store.announceError("could not load the model list");

    expect(store.getState().error).toBe("could not load the model list");
    expect(store.getState().loading).toBe(false);
  });

  test("initialState is the documented idle shape", () => {
    expect(initialState).toEqual({
      query: "",
      model: "",
      k: 10,
      loading: false,
      results: null,
      error: null,
    });
  });
});
