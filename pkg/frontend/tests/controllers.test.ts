import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { BrowseController, QueueController } from "../src/controllers.js";
import type { QueueEntry } from "../src/types.js";

// route-keyed stub service; each handler returns [status, body]
type Handler = (init: RequestInit) => [number, unknown];

function stubClient(routes: Record<string, Handler>, log?: string[]): ApiClient {
  const fetchFn = (async (url: RequestInfo | URL, init?: RequestInit) => {
    const path = String(url);
    log?.push(`${init?.method ?? "GET"} ${path}`);
    for (const [prefix, handler] of Object.entries(routes)) {
      if (path.startsWith(prefix)) {
        const [status, body] = handler(init ?? {});
        return new Response(JSON.stringify(body), { status });
      }
    }
    return new Response(JSON.stringify({ error: "not_found", detail: path }), { status: 404 });
  }) as typeof fetch;
  return new ApiClient("", () => "tok", fetchFn);
}

function entry(id: string): QueueEntry {
  return {
    batch: {
      id,
      contributor_ref: "c",
      method: "transcription",
      source: "mturk",
      received_at: "2011-01-19T08:00:00+00:00",
      status: "pending",
      message_count: 20,
      rejection_reason: null,
      reward_amount: null,
      reward_currency: null,
    },
    report: {
      message_count: 20,
      language_counts: { chinese: 20 },
      exact_duplicates: [],
      near_duplicates: [],
      blocklist_fraction: 0,
      flagged_fraction: 0,
      recommendation: "approve",
      reasons: [],
    },
    messages: [{ id: "m", body: "x", language: "chinese" }],
    reward_previews: {
      mturk: { amount: "0.20", currency: "USD", below_minimum: false },
      zhubajie1: { amount: "2.00", currency: "CNY", below_minimum: false },
    },
  };
}

describe("QueueController", () => {
  it("approves with the selected scheme and reports the computed reward", async () => {
    let pending = [entry("b1")];
    let decided: unknown = null;
    const client = stubClient({
      "/moderation/b1/decision": (init) => {
        decided = JSON.parse(init.body as string);
        pending = [];
        return [
          200,
          { batch: { ...entry("b1").batch, status: "approved", reward_amount: "2.00", reward_currency: "CNY" } },
        ];
      },
      "/moderation/queue": () => [200, { queue: pending }],
    });
    const ctl = new QueueController(client);
    await ctl.refresh();
    ctl.open("b1");
    ctl.setScheme("b1", "zhubajie1");
    expect(ctl.previewAmount("b1")).toEqual({ amount: "2.00", currency: "CNY" });
    await ctl.approve("b1");
    expect(decided).toEqual({ decision: "approve", scheme: "zhubajie1" });
    expect(ctl.banner?.kind).toBe("success");
    expect(ctl.banner?.text).toContain("2.00 CNY");
    expect(ctl.entries).toEqual([]);
    expect(ctl.openId).toBeNull();
  });

  it("defaults to the first scheme in sorted order", async () => {
    const client = stubClient({ "/moderation/queue": () => [200, { queue: [entry("b2")] }] });
    const ctl = new QueueController(client);
    await ctl.refresh();
    expect(ctl.chosenScheme("b2")).toBe("mturk");
    expect(ctl.previewAmount("b2")).toEqual({ amount: "0.20", currency: "USD" });
  });

  it("does not send a reject without a reason", async () => {
    const log: string[] = [];
    const client = stubClient({ "/moderation/queue": () => [200, { queue: [entry("b3")] }] }, log);
    const ctl = new QueueController(client);
    await ctl.refresh();
    await ctl.reject("b3");
    expect(ctl.banner?.kind).toBe("error");
    expect(ctl.banner?.text).toContain("reason");
    expect(log.filter((l) => l.startsWith("POST"))).toEqual([]);
  });

  it("surfaces a 409 as the conflict banner and refreshes", async () => {
    let queue = [entry("b4")];
    const client = stubClient({
      "/moderation/b4/decision": () => {
        queue = [];
        return [409, { error: "terminal_state", detail: "batch b4 is already approved" }];
      },
      "/moderation/queue": () => [200, { queue }],
    });
    const ctl = new QueueController(client);
    await ctl.refresh();
    await ctl.approve("b4");
    expect(ctl.banner?.kind).toBe("conflict");
    expect(ctl.banner?.text).toContain("already approved");
    expect(ctl.entries).toEqual([]);
    expect(ctl.html()).toContain("banner-conflict");
  });

  it("surfaces a 401 as the auth banner", async () => {
    const client = stubClient({
      "/moderation/queue": () => [401, { error: "unauthorized", detail: "missing or invalid admin token" }],
    });
    const ctl = new QueueController(client);
    await ctl.refresh();
    expect(ctl.banner?.kind).toBe("auth");
    expect(ctl.html()).toContain("banner-auth");
  });
});

describe("BrowseController", () => {
  it("pages through results and resets the offset on filter changes", async () => {
    const calls: string[] = [];
    const client = stubClient({
      "/corpus/messages": () => [200, { total: 120, offset: 0, limit: 50, messages: [] }],
    }, calls);
    const ctl = new BrowseController(client);
    await ctl.load();
    await ctl.next();
    expect(ctl.filters.offset).toBe(50);
    await ctl.prev();
    expect(ctl.filters.offset).toBe(0);
    await ctl.prev(); // already at the start
    expect(ctl.filters.offset).toBe(0);
    await ctl.applyFilters({ language: "chinese", offset: 999 as never });
    expect(ctl.filters.offset).toBe(0);
    expect(calls.at(-1)).toContain("language=chinese");
  });
});
