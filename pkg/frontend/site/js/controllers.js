/**
 * Screen controllers. Each holds view state, talks to the ApiClient and
 * exposes html() for the shell to inject. Kept free of DOM access so the
 * whole moderation flow is exercisable from tests against a live service.
 */
import { ApiError } from "./api.js";
import { rejectDisabled, renderBrowse, renderQueue, renderStats } from "./render.js";
function bannerFor(err) {
    if (err instanceof ApiError) {
        if (err.status === 401)
            return { kind: "auth", text: `not authorized: ${err.message}` };
        if (err.status === 409)
            return { kind: "conflict", text: `conflict: ${err.message}` };
        return { kind: "error", text: err.message };
    }
    return { kind: "error", text: String(err) };
}
export class QueueController {
    constructor(client) {
        this.client = client;
        this.entries = null;
        this.openId = null;
        this.schemeChoice = {};
        this.reasonDraft = {};
        this.banner = null;
    }
    async refresh() {
        try {
            const resp = await this.client.getQueue();
            this.entries = resp.queue;
            if (this.openId !== null && !this.entries.some((e) => e.batch.id === this.openId)) {
                this.openId = null;
            }
        }
        catch (err) {
            this.entries = this.entries ?? [];
            this.banner = bannerFor(err);
        }
    }
    open(batchId) {
        this.openId = this.openId === batchId ? null : batchId;
    }
    setScheme(batchId, scheme) {
        this.schemeChoice[batchId] = scheme;
    }
    setReason(batchId, reason) {
        this.reasonDraft[batchId] = reason;
    }
    /** The scheme the approve button would submit for this batch. */
    chosenScheme(batchId) {
        const explicit = this.schemeChoice[batchId];
        if (explicit !== undefined)
            return explicit;
        const entry = this.entries?.find((e) => e.batch.id === batchId);
        if (entry === undefined)
            return undefined;
        return Object.keys(entry.reward_previews).sort()[0];
    }
    /** Reward preview shown for the chosen scheme, verbatim from the queue
     * response. */
    previewAmount(batchId) {
        const entry = this.entries?.find((e) => e.batch.id === batchId);
        const scheme = this.chosenScheme(batchId);
        if (entry === undefined || scheme === undefined)
            return undefined;
        const p = entry.reward_previews[scheme];
        return p === undefined ? undefined : { amount: p.amount, currency: p.currency };
    }
    async approve(batchId) {
        const scheme = this.chosenScheme(batchId);
        try {
            const resp = await this.client.decide(batchId, { decision: "approve", scheme });
            const b = resp.batch;
            this.banner = {
                kind: "success",
                text: `approved ${b.id}: reward ${b.reward_amount ?? "0"} ${b.reward_currency ?? ""}`.trim(),
            };
        }
        catch (err) {
            this.banner = bannerFor(err);
        }
        await this.refresh();
    }
    async reject(batchId) {
        const reason = this.reasonDraft[batchId] ?? "";
        if (rejectDisabled(reason)) {
            this.banner = { kind: "error", text: "a reject needs a reason" };
            return;
        }
        try {
            const resp = await this.client.decide(batchId, { decision: "reject", reason });
            this.banner = { kind: "success", text: `rejected ${resp.batch.id}` };
        }
        catch (err) {
            this.banner = bannerFor(err);
        }
        await this.refresh();
    }
    html() {
        return renderQueue(this.entries, this.openId, this.schemeChoice, this.reasonDraft, this.banner);
    }
}
export class BrowseController {
    constructor(client) {
        this.client = client;
        this.page = null;
        this.filters = { offset: 0, limit: 50 };
        this.banner = null;
    }
    async load() {
        try {
            this.page = await this.client.browseMessages(this.filters);
            this.banner = null;
        }
        catch (err) {
            this.banner = bannerFor(err);
        }
    }
    async applyFilters(update) {
        this.filters = { ...this.filters, ...update, offset: 0 };
        await this.load();
    }
    async next() {
        if (this.page === null)
            return;
        const step = this.filters.limit ?? 50;
        if ((this.filters.offset ?? 0) + step >= this.page.total)
            return;
        this.filters.offset = (this.filters.offset ?? 0) + step;
        await this.load();
    }
    async prev() {
        const step = this.filters.limit ?? 50;
        this.filters.offset = Math.max(0, (this.filters.offset ?? 0) - step);
        await this.load();
    }
    html() {
        return renderBrowse(this.page, this.filters, this.banner);
    }
}
export class StatsController {
    constructor(client) {
        this.client = client;
        this.report = null;
        this.banner = null;
    }
    async load() {
        try {
            this.report = await this.client.getStats();
            this.banner = null;
        }
        catch (err) {
            this.banner = bannerFor(err);
        }
    }
    html() {
        return renderStats(this.report, this.banner);
    }
}
