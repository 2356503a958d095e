// Thin typed client over the advice service's JSON API.  The console holds
// no matching logic: everything it shows comes back from these calls.
export class ApiError extends Error {
    status;
    constructor(status, message) {
        super(message);
        this.status = status;
        this.name = "ApiError";
    }
}
export function buildDecisionsQuery(filters) {
    const params = new URLSearchParams();
    if (filters.publisher)
        params.set("publisher", filters.publisher);
    if (filters.show !== undefined)
        params.set("show", String(filters.show));
    if (filters.source)
        params.set("source", filters.source);
    if (filters.since !== undefined)
        params.set("since", String(filters.since));
    params.set("page", String(filters.page ?? 1));
    params.set("page_size", String(filters.page_size ?? 20));
    return params.toString();
}
export class AdviceApi {
    settings;
    fetchFn;
    constructor(settings, fetchFn = (input, init) => fetch(input, init)) {
        this.settings = settings;
        this.fetchFn = fetchFn;
    }
    url(path) {
        return this.settings.baseUrl.replace(/\/+$/, "") + path;
    }
    headers(mutating) {
        const headers = { "Content-Type": "application/json" };
        if (mutating && this.settings.adminToken) {
            headers["Authorization"] = `Bearer ${this.settings.adminToken}`;
        }
        return headers;
    }
    // Server rejections surface verbatim: detail string if present, raw text
    // otherwise.
    async request(path, init) {
        const response = await this.fetchFn(this.url(path), init);
        const text = await response.text();
        if (!response.ok) {
            let message = text;
            try {
                const body = JSON.parse(text);
                if (typeof body.detail === "string")
                    message = body.detail;
                else if (body.detail !== undefined)
                    message = JSON.stringify(body.detail);
            }
            catch {
                // non-JSON error body: keep raw text
            }
            throw new ApiError(response.status, message);
        }
        return JSON.parse(text);
    }
    fetchDecisions(filters) {
        return this.request(`/v1/decisions?${buildDecisionsQuery(filters)}`);
    }
    async getOverride(key) {
        try {
            return await this.request(`/v1/overrides/${encodeURIComponent(key)}`);
        }
        catch (error) {
            if (error instanceof ApiError && error.status === 404)
                return null;
            throw error;
        }
    }
    putOverride(key, action, entities) {
        return this.request("/v1/overrides", {
            method: "PUT",
            headers: this.headers(true),
            body: JSON.stringify({
                key,
                action,
                entities: entities.length ? entities : undefined,
                author: this.settings.author ?? "",
            }),
        });
    }
    deleteOverride(key) {
        return this.request(`/v1/overrides/${encodeURIComponent(key)}`, {
            method: "DELETE",
            headers: this.headers(true),
        });
    }
    searchEntities(q, limit = 10) {
        const params = new URLSearchParams({ q, limit: String(limit) });
        return this.request(`/v1/entities?${params.toString()}`);
    }
    health() {
        return this.request("/v1/health");
    }
}
