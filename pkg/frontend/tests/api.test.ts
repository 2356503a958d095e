import { describe, expect, it } from "vitest";

import { AdviceApi, ApiError, buildDecisionsQuery } from "../src/api.js";

function fakeFetch(status: number, body: unknown) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn, calls };
}

describe("buildDecisionsQuery", () => {
  it("serializes only the filters that are set", () => {
    expect(buildDecisionsQuery({})).toBe("page=1&page_size=20");
    expect(buildDecisionsQuery({ show: false, publisher: "daily-ledger", page: 3 })).toBe(
      "publisher=daily-ledger&show=false&page=3&page_size=20",
    );
    expect(buildDecisionsQuery({ since: 1723300000 })).toContain("since=1723300000");
  });
});

describe("AdviceApi", () => {
  it("sends the bearer token only on mutations and only when configured", async () => {
    const { fn, calls } = fakeFetch(200, { key: "k", action: "suppress", entities: [], author: "", created_at: 0 });
    const api = new AdviceApi({ baseUrl: "http://svc:1", adminToken: "sesame", author: "casey" }, fn);
    await api.putOverride("https://e.com/a", "suppress", []);
    expect((calls[0].init?.headers as Record<string, string>)["Authorization"]).toBe("Bearer sesame");

    const open = fakeFetch(200, { items: [], page: 1, page_size: 20, total: 0 });
    const tokenless = new AdviceApi({ baseUrl: "http://svc:1" }, open.fn);
    await tokenless.fetchDecisions({});
    expect(open.calls[0].init).toBeUndefined();
  });

  it("includes the author from settings in override bodies", async () => {
    const { fn, calls } = fakeFetch(200, { key: "k", action: "suppress", entities: [], author: "casey", created_at: 0 });
    const api = new AdviceApi({ baseUrl: "http://svc:1", author: "casey" }, fn);
    await api.putOverride("https://e.com/a", "suppress", []);
    expect(JSON.parse(calls[0].init?.body as string).author).toBe("casey");
  });

  it("propagates the server's rejection message verbatim", async () => {
    const { fn } = fakeFetch(401, { detail: "admin token required" });
    const api = new AdviceApi({ baseUrl: "http://svc:1" }, fn);
    await expect(api.putOverride("k", "suppress", [])).rejects.toMatchObject({
      status: 401,
      message: "admin token required",
    });
  });

  it("maps 404 override lookups to null", async () => {
    const { fn } = fakeFetch(404, { detail: "no override" });
    const api = new AdviceApi({ baseUrl: "http://svc:1" }, fn);
    expect(await api.getOverride("https://e.com/missing")).toBeNull();
  });

  it("other errors from override lookups still throw", async () => {
    const { fn } = fakeFetch(500, { detail: "boom" });
    const api = new AdviceApi({ baseUrl: "http://svc:1" }, fn);
    await expect(api.getOverride("k")).rejects.toBeInstanceOf(ApiError);
  });

  it("percent-encodes override keys so query strings survive the path", async () => {
    const { fn, calls } = fakeFetch(200, { deleted: true });
    const api = new AdviceApi({ baseUrl: "http://svc:1" }, fn);
    await api.deleteOverride("https://e.com/story?id=9");
    expect(calls[0].url).toBe("http://svc:1/v1/overrides/https%3A%2F%2Fe.com%2Fstory%3Fid%3D9");
  });

  it("builds entity search urls against the configured base", async () => {
    const { fn, calls } = fakeFetch(200, { items: [] });
    const api = new AdviceApi({ baseUrl: "http://svc:9999/" }, fn);
    await api.searchEntities("spark", 5);
    expect(calls[0].url).toBe("http://svc:9999/v1/entities?q=spark&limit=5");
  });
});
