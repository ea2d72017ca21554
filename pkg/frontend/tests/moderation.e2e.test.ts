/**
 * Moderation round-trip against a live service process.
 *
 * Boots the real backend (python3 -m smscorpus serve) on a scratch store,
 * seeds submissions over HTTP, then drives the same controllers the browser
 * shell uses: approve path, reject path with reason gating, a raced second
 * decision, token failures, browsing and statistics.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { BrowseController, QueueController, StatsController } from "../src/controllers.js";
import { formatShare } from "../src/render.js";
import type { QueueResponse, StatsReport } from "../src/types.js";

const PORT = 8400 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;
const ADMIN_TOKEN = "ui-e2e-admin-token";
const PROFILE = { age_bucket: "21-25", gender: "female", phone_brand: "nokia" };

const ZH_LINES = [
  "今天晚上一起吃饭吗",
  "我快到地铁站了等我五分钟",
  "明天的会议改到下午三点了",
  "记得带伞外面下雨了",
  "这部电影真的很好看推荐你去",
  "周末要不要去爬山放松一下",
  "作业写完了吗借我参考一下",
  "妈妈让你早点回家吃饭",
  "新开的那家奶茶店排队好长",
  "考试成绩出来了我过了好开心",
  "帮我带一份炒饭谢谢啦",
  "足球赛几点开始别迟到了",
  "我手机快没电了先这样吧",
  "那本书我看完了改天还你",
  "航班延误两个小时真倒霉",
  "十二月的车票已经买好了",
  "老师说下周交报告别忘了",
  "公交车太挤了我打车过去",
  "你寄的包裹我收到了",
  "下周一起去图书馆自习吧",
];

const EN_TWO = ["hey did u catch the bus already", "meet me at the usual place for lunch"];
const EN_FIVE = [
  "running late sorry start without me",
  "can u print my slides as well thanks",
  "the lecture moved to the big hall",
  "dinner is on me tonight i got the job",
  "bring ur charger mine just died",
];

let server: ChildProcess;
let workDir: string;
let serverLog = "";

let zhBatch = "";
let enTwoBatch = "";
let enFiveBatch = "";

async function submit(payload: Record<string, unknown>): Promise<string> {
  const resp = await fetch(`${BASE}/submissions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (resp.status !== 201) {
    throw new Error(`seed submission failed: ${resp.status} ${await resp.text()}`);
  }
  const data = (await resp.json()) as { batch_id: string };
  return data.batch_id;
}

async function rawQueue(): Promise<QueueResponse> {
  const resp = await fetch(`${BASE}/moderation/queue`, {
    headers: { "X-Admin-Token": ADMIN_TOKEN },
  });
  expect(resp.status).toBe(200);
  return (await resp.json()) as QueueResponse;
}

function adminClient(token: string = ADMIN_TOKEN): ApiClient {
  return new ApiClient(BASE, () => token);
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "smscorpus-ui-"));
  const keyFile = join(workDir, "keys.txt");
  writeFileSync(
    keyFile,
    `pseudonym_key=${"00112233445566778899aabbccddeeff".repeat(2)}\n` +
      `upload_secret=${"a1b2".repeat(16)}\n` +
      `admin_token=${ADMIN_TOKEN}\n`,
  );
  server = spawn(
    "python3",
    ["-m", "smscorpus", "serve", "--host", "127.0.0.1", "--port", String(PORT)],
    {
      env: {
        ...process.env,
        SMS_CORPUS_STORE: join(workDir, "store"),
        SMS_CORPUS_KEYS: keyFile,
      },
      stdio: ["ignore", "pipe", "pipe"],
    },
  );
  server.stdout?.on("data", (chunk: Buffer) => (serverLog += chunk.toString()));
  server.stderr?.on("data", (chunk: Buffer) => (serverLog += chunk.toString()));

  const deadline = Date.now() + 60_000;
  for (;;) {
    if (server.exitCode !== null) {
      throw new Error(`service exited early (code ${server.exitCode}):\n${serverLog}`);
    }
    try {
      const resp = await fetch(`${BASE}/stats`);
      if (resp.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service did not come up on ${BASE}:\n${serverLog}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }

  zhBatch = await submit({
    source: "zhubajie",
    payload: JSON.stringify({ language: "chinese", messages: ZH_LINES }),
    profile: PROFILE,
    contributor: "worker-zh-1",
  });
  enTwoBatch = await submit({
    source: "mturk",
    payload: JSON.stringify({ language: "english", messages: EN_TWO }),
    profile: PROFILE,
    contributor: "worker-en-1",
  });
  enFiveBatch = await submit({
    source: "shorttask",
    payload: JSON.stringify({ language: "english", messages: EN_FIVE }),
    profile: PROFILE,
    contributor: "worker-en-2",
  });
});

afterAll(async () => {
  if (server !== undefined && server.exitCode === null) {
    server.kill("SIGTERM");
    await new Promise<void>((resolve) => {
      const t = setTimeout(() => {
        server.kill("SIGKILL");
        resolve();
      }, 5_000);
      server.once("exit", () => {
        clearTimeout(t);
        resolve();
      });
    });
  }
  if (workDir !== undefined) rmSync(workDir, { recursive: true, force: true });
});

describe("moderation round-trip", () => {
  it("lists the seeded batches in the queue", async () => {
    const ctl = new QueueController(adminClient());
    await ctl.refresh();
    expect(ctl.banner).toBeNull();
    expect(ctl.entries?.map((e) => e.batch.id).sort()).toEqual(
      [zhBatch, enTwoBatch, enFiveBatch].sort(),
    );
    const html = ctl.html();
    for (const id of [zhBatch, enTwoBatch, enFiveBatch]) expect(html).toContain(id);
  });

  it("approve: the displayed preview equals the reward the service computes", async () => {
    const ctl = new QueueController(adminClient());
    await ctl.refresh();
    ctl.open(zhBatch);
    ctl.setScheme(zhBatch, "zhubajie1");

    const preview = ctl.previewAmount(zhBatch);
    expect(preview).toBeDefined();
    expect(preview!.currency).toBe("CNY");
    expect(Number(preview!.amount)).toBeGreaterThan(0);

    // what the screen shows is exactly what the service sent
    const fromApi = (await rawQueue()).queue.find((e) => e.batch.id === zhBatch);
    expect(fromApi?.reward_previews["zhubajie1"]?.amount).toBe(preview!.amount);
    expect(ctl.html()).toContain(`${preview!.amount} ${preview!.currency}`);

    await ctl.approve(zhBatch);
    expect(ctl.banner?.kind).toBe("success");
    const match = ctl.banner?.text.match(/reward (\S+) (\S+)$/);
    expect(match).not.toBeNull();
    // decision amount computed by the service == preview shown before the click
    expect(match![1]).toBe(preview!.amount);
    expect(match![2]).toBe(preview!.currency);

    expect(ctl.entries?.some((e) => e.batch.id === zhBatch)).toBe(false);
    // the banner still names the batch; the table row is what must be gone
    expect(ctl.html()).not.toContain(`data-batch="${zhBatch}"`);
    const refreshed = await rawQueue();
    expect(refreshed.queue.some((e) => e.batch.id === zhBatch)).toBe(false);
  });

  it("reject: reason gating holds, then the batch leaves the queue", async () => {
    const ctl = new QueueController(adminClient());
    await ctl.refresh();
    ctl.open(enTwoBatch);
    expect(ctl.html()).toMatch(/data-action="reject"[^>]* disabled/);

    await ctl.reject(enTwoBatch); // no reason typed yet
    expect(ctl.banner?.kind).toBe("error");
    expect(ctl.entries?.some((e) => e.batch.id === enTwoBatch)).toBe(true);

    ctl.setReason(enTwoBatch, "samples read like copied ad text");
    expect(ctl.html()).not.toMatch(/data-action="reject"[^>]* disabled/);
    await ctl.reject(enTwoBatch);
    expect(ctl.banner?.kind).toBe("success");
    expect(ctl.banner?.text).toContain("rejected");
    expect(ctl.entries?.some((e) => e.batch.id === enTwoBatch)).toBe(false);

    // rejected content never reaches the public corpus
    const resp = await fetch(`${BASE}/corpus/messages?language=english`);
    expect(((await resp.json()) as { total: number }).total).toBe(0);
  });

  it("raced second decision surfaces the conflict banner", async () => {
    const first = new QueueController(adminClient());
    const second = new QueueController(adminClient());
    await first.refresh();
    await second.refresh();
    expect(second.entries?.some((e) => e.batch.id === enFiveBatch)).toBe(true);

    first.open(enFiveBatch);
    first.setScheme(enFiveBatch, "mturk");
    await first.approve(enFiveBatch);
    expect(first.banner?.kind).toBe("success");

    // second moderator still sees the stale row and decides again
    await second.approve(enFiveBatch);
    expect(second.banner?.kind).toBe("conflict");
    expect(second.banner?.text).toContain("already");
    expect(second.html()).toContain("banner-conflict");
    expect(second.entries?.some((e) => e.batch.id === enFiveBatch)).toBe(false);
  });

  it("a wrong admin token shows the auth banner", async () => {
    const ctl = new QueueController(adminClient("not-the-token"));
    await ctl.refresh();
    expect(ctl.banner?.kind).toBe("auth");
    expect(ctl.html()).toContain("banner-auth");
  });
});

describe("browse screen against the live corpus", () => {
  it("sees only approved messages and filters map to query parameters", async () => {
    const ctl = new BrowseController(new ApiClient(BASE, () => null));
    await ctl.load();
    expect(ctl.page?.total).toBe(25); // 20 zh + 5 en approved above

    await ctl.applyFilters({ language: "chinese" });
    expect(ctl.page?.total).toBe(20);
    await ctl.applyFilters({ language: "english" });
    expect(ctl.page?.total).toBe(5);
    expect(ctl.page?.messages.every((m) => m.language === "english")).toBe(true);

    await ctl.applyFilters({ language: undefined, source: "shorttask" });
    expect(ctl.page?.total).toBe(5);
    await ctl.applyFilters({ source: "mturk" });
    expect(ctl.page?.total).toBe(0);
    expect(ctl.html()).toContain("no messages match");
  });

  it("pages with prev and next", async () => {
    const ctl = new BrowseController(new ApiClient(BASE, () => null));
    await ctl.applyFilters({ language: "chinese", limit: 8 });
    expect(ctl.page?.messages.length).toBe(8);
    expect(ctl.html()).toContain("1-8 of 20");

    await ctl.next();
    expect(ctl.html()).toContain("9-16 of 20");
    await ctl.next();
    expect(ctl.html()).toContain("17-20 of 20");
    expect(ctl.html()).toMatch(/data-action="browse-next" disabled/);
    await ctl.next(); // already on the last page
    expect(ctl.html()).toContain("17-20 of 20");
    await ctl.prev();
    await ctl.prev();
    expect(ctl.html()).toContain("1-8 of 20");
  });

  it("never shows raw phone numbers", async () => {
    const ctl = new BrowseController(new ApiClient(BASE, () => null));
    await ctl.applyFilters({ limit: 100 });
    for (const m of ctl.page?.messages ?? []) {
      expect(m.body).not.toMatch(/\d{7,}/);
    }
  });
});

describe("statistics screen against the live corpus", () => {
  it("renders every number exactly as the service reports it", async () => {
    const ctl = new StatsController(new ApiClient(BASE, () => null));
    await ctl.load();
    const html = ctl.html();

    const raw = (await (await fetch(`${BASE}/stats`)).json()) as StatsReport;
    expect(html).toContain(`total messages: <span class="big">${raw.summary.total_messages}</span>`);
    for (const [lang, s] of Object.entries(raw.summary.languages)) {
      expect(html).toContain(lang);
      expect(html).toContain(`${s.messages}</span> messages`);
      expect(html).toContain(`${s.contributors} contributors`);
    }
    for (const buckets of Object.values(raw.contributor_distribution)) {
      for (const b of buckets) {
        expect(html).toContain(`${formatShare(b.share)}% (${b.count})`);
      }
    }
    for (const byLang of Object.values(raw.demographics)) {
      for (const entry of Object.values(byLang)) {
        for (const b of entry.buckets) {
          expect(html).toContain(`${formatShare(b.share)}% (${b.count})`);
        }
      }
    }
  });
});
