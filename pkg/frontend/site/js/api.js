/**
 * Typed client for the corpus service JSON API.
 *
 * All requests go through one fetch wrapper that turns non-2xx responses
 * into ApiError carrying the server's error code and detail, so screens can
 * branch on status (401 -> token banner, 409 -> conflict banner) without
 * parsing bodies themselves.
 */
export class ApiError extends Error {
    constructor(status, code, detail) {
        super(detail);
        this.name = "ApiError";
        this.status = status;
        this.code = code;
    }
}
/** Serialize only the filters that are actually set, in a stable order. */
export function buildQuery(filters) {
    const params = new URLSearchParams();
    if (filters.language)
        params.set("language", filters.language);
    if (filters.source)
        params.set("source", filters.source);
    if (filters.method)
        params.set("method", filters.method);
    if (filters.profile_id)
        params.set("profile_id", filters.profile_id);
    if (filters.offset !== undefined)
        params.set("offset", String(filters.offset));
    if (filters.limit !== undefined)
        params.set("limit", String(filters.limit));
    const qs = params.toString();
    return qs === "" ? "" : `?${qs}`;
}
export class ApiClient {
    constructor(baseUrl = "", tokenSource = () => null, fetchFn = globalThis.fetch.bind(globalThis)) {
        this.baseUrl = baseUrl;
        this.tokenSource = tokenSource;
        this.fetchFn = fetchFn;
    }
    async request(method, path, body, admin = false) {
        const headers = {};
        if (body !== undefined)
            headers["Content-Type"] = "application/json";
        if (admin) {
            const token = this.tokenSource();
            if (token !== null)
                headers["X-Admin-Token"] = token;
        }
        let resp;
        try {
            resp = await this.fetchFn(this.baseUrl + path, {
                method,
                headers,
                body: body === undefined ? undefined : JSON.stringify(body),
            });
        }
        catch (err) {
            throw new ApiError(0, "network_error", `cannot reach the service: ${String(err)}`);
        }
        if (!resp.ok) {
            let code = "http_error";
            let detail = `${resp.status} ${resp.statusText}`;
            try {
                const data = (await resp.json());
                if (typeof data.error === "string")
                    code = data.error;
                if (typeof data.detail === "string")
                    detail = data.detail;
            }
            catch {
                // non-JSON error body, keep the status line
            }
            throw new ApiError(resp.status, code, detail);
        }
        return (await resp.json());
    }
    getQueue() {
        return this.request("GET", "/moderation/queue", undefined, true);
    }
    decide(batchId, body) {
        return this.request("POST", `/moderation/${encodeURIComponent(batchId)}/decision`, body, true);
    }
    browseMessages(filters) {
        return this.request("GET", `/corpus/messages${buildQuery(filters)}`);
    }
    getStats() {
        return this.request("GET", "/stats");
    }
    listReleases() {
        return this.request("GET", "/releases");
    }
}
