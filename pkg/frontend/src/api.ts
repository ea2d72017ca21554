/**
 * Typed client for the corpus service JSON API.
 *
 * All requests go through one fetch wrapper that turns non-2xx responses
 * into ApiError carrying the server's error code and detail, so screens can
 * branch on status (401 -> token banner, 409 -> conflict banner) without
 * parsing bodies themselves.
 */

import type {
  BrowseFilters,
  BrowsePage,
  DecisionResponse,
  QueueResponse,
  ReleaseInfo,
  StatsReport,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export interface DecisionBody {
  decision: "approve" | "reject";
  scheme?: string;
  reason?: string;
}

/** Serialize only the filters that are actually set, in a stable order. */
export function buildQuery(filters: BrowseFilters): string {
  const params = new URLSearchParams();
  if (filters.language) params.set("language", filters.language);
  if (filters.source) params.set("source", filters.source);
  if (filters.method) params.set("method", filters.method);
  if (filters.profile_id) params.set("profile_id", filters.profile_id);
  if (filters.offset !== undefined) params.set("offset", String(filters.offset));
  if (filters.limit !== undefined) params.set("limit", String(filters.limit));
  const qs = params.toString();
  return qs === "" ? "" : `?${qs}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly tokenSource: () => string | null = () => null,
    private readonly fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    admin = false,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (admin) {
      const token = this.tokenSource();
      if (token !== null) headers["X-Admin-Token"] = token;
    }
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "network_error", `cannot reach the service: ${String(err)}`);
    }
    if (!resp.ok) {
      let code = "http_error";
      let detail = `${resp.status} ${resp.statusText}`;
      try {
        const data = (await resp.json()) as { error?: string; detail?: string };
        if (typeof data.error === "string") code = data.error;
        if (typeof data.detail === "string") detail = data.detail;
      } catch {
        // non-JSON error body, keep the status line
      }
      throw new ApiError(resp.status, code, detail);
    }
    return (await resp.json()) as T;
  }

  getQueue(): Promise<QueueResponse> {
    return this.request<QueueResponse>("GET", "/moderation/queue", undefined, true);
  }

  decide(batchId: string, body: DecisionBody): Promise<DecisionResponse> {
    return this.request<DecisionResponse>(
      "POST",
      `/moderation/${encodeURIComponent(batchId)}/decision`,
      body,
      true,
    );
  }

  browseMessages(filters: BrowseFilters): Promise<BrowsePage> {
    return this.request<BrowsePage>("GET", `/corpus/messages${buildQuery(filters)}`);
  }

  getStats(): Promise<StatsReport> {
    return this.request<StatsReport>("GET", "/stats");
  }

  listReleases(): Promise<{ versions: ReleaseInfo[] }> {
    return this.request<{ versions: ReleaseInfo[] }>("GET", "/releases");
  }
}
