/**
 * Screen controllers. Each holds view state, talks to the ApiClient and
 * exposes html() for the shell to inject. Kept free of DOM access so the
 * whole moderation flow is exercisable from tests against a live service.
 */

import { ApiClient, ApiError } from "./api.js";
import type { Banner } from "./render.js";
import { rejectDisabled, renderBrowse, renderQueue, renderStats } from "./render.js";
import type { BrowseFilters, BrowsePage, QueueEntry, StatsReport } from "./types.js";

function bannerFor(err: unknown): Banner {
  if (err instanceof ApiError) {
    if (err.status === 401) return { kind: "auth", text: `not authorized: ${err.message}` };
    if (err.status === 409) return { kind: "conflict", text: `conflict: ${err.message}` };
    return { kind: "error", text: err.message };
  }
  return { kind: "error", text: String(err) };
}

export class QueueController {
  entries: QueueEntry[] | null = null;
  openId: string | null = null;
  schemeChoice: Record<string, string> = {};
  reasonDraft: Record<string, string> = {};
  banner: Banner | null = null;

  constructor(private readonly client: ApiClient) {}

  async refresh(): Promise<void> {
    try {
      const resp = await this.client.getQueue();
      this.entries = resp.queue;
      if (this.openId !== null && !this.entries.some((e) => e.batch.id === this.openId)) {
        this.openId = null;
      }
    } catch (err) {
      this.entries = this.entries ?? [];
      this.banner = bannerFor(err);
    }
  }

  open(batchId: string): void {
    this.openId = this.openId === batchId ? null : batchId;
  }

  setScheme(batchId: string, scheme: string): void {
    this.schemeChoice[batchId] = scheme;
  }

  setReason(batchId: string, reason: string): void {
    this.reasonDraft[batchId] = reason;
  }

  /** The scheme the approve button would submit for this batch. */
  chosenScheme(batchId: string): string | undefined {
    const explicit = this.schemeChoice[batchId];
    if (explicit !== undefined) return explicit;
    const entry = this.entries?.find((e) => e.batch.id === batchId);
    if (entry === undefined) return undefined;
    return Object.keys(entry.reward_previews).sort()[0];
  }

  /** Reward preview shown for the chosen scheme, verbatim from the queue
   * response. */
  previewAmount(batchId: string): { amount: string; currency: string } | undefined {
    const entry = this.entries?.find((e) => e.batch.id === batchId);
    const scheme = this.chosenScheme(batchId);
    if (entry === undefined || scheme === undefined) return undefined;
    const p = entry.reward_previews[scheme];
    return p === undefined ? undefined : { amount: p.amount, currency: p.currency };
  }

  async approve(batchId: string): Promise<void> {
    const scheme = this.chosenScheme(batchId);
    try {
      const resp = await this.client.decide(batchId, { decision: "approve", scheme });
      const b = resp.batch;
      this.banner = {
        kind: "success",
        text: `approved ${b.id}: reward ${b.reward_amount ?? "0"} ${b.reward_currency ?? ""}`.trim(),
      };
    } catch (err) {
      this.banner = bannerFor(err);
    }
    await this.refresh();
  }

  async reject(batchId: string): Promise<void> {
    const reason = this.reasonDraft[batchId] ?? "";
    if (rejectDisabled(reason)) {
      this.banner = { kind: "error", text: "a reject needs a reason" };
      return;
    }
    try {
      const resp = await this.client.decide(batchId, { decision: "reject", reason });
      this.banner = { kind: "success", text: `rejected ${resp.batch.id}` };
    } catch (err) {
      this.banner = bannerFor(err);
    }
    await this.refresh();
  }

  html(): string {
    return renderQueue(this.entries, this.openId, this.schemeChoice, this.reasonDraft, this.banner);
  }
}

export class BrowseController {
  page: BrowsePage | null = null;
  filters: BrowseFilters = { offset: 0, limit: 50 };
  banner: Banner | null = null;

  constructor(private readonly client: ApiClient) {}

  async load(): Promise<void> {
    try {
      this.page = await this.client.browseMessages(this.filters);
      this.banner = null;
    } catch (err) {
      this.banner = bannerFor(err);
    }
  }

  async applyFilters(update: Partial<BrowseFilters>): Promise<void> {
    this.filters = { ...this.filters, ...update, offset: 0 };
    await this.load();
  }

  async next(): Promise<void> {
    if (this.page === null) return;
    const step = this.filters.limit ?? 50;
    if ((this.filters.offset ?? 0) + step >= this.page.total) return;
    this.filters.offset = (this.filters.offset ?? 0) + step;
    await this.load();
  }

  async prev(): Promise<void> {
    const step = this.filters.limit ?? 50;
    this.filters.offset = Math.max(0, (this.filters.offset ?? 0) - step);
    await this.load();
  }

  html(): string {
    return renderBrowse(this.page, this.filters, this.banner);
  }
}

export class StatsController {
  report: StatsReport | null = null;
  banner: Banner | null = null;

  constructor(private readonly client: ApiClient) {}

  async load(): Promise<void> {
    try {
      this.report = await this.client.getStats();
      this.banner = null;
    } catch (err) {
      this.banner = bannerFor(err);
    }
  }

  html(): string {
    return renderStats(this.report, this.banner);
  }
}
