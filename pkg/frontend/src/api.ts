// Thin typed client over the advice service's JSON API.  The console holds
// no matching logic: everything it shows comes back from these calls.

import type {
  DecisionFilters,
  DecisionsPage,
  EntitySummary,
  HealthInfo,
  OverrideInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ApiSettings {
  baseUrl: string;
  adminToken?: string;
  author?: string;
}

export function buildDecisionsQuery(filters: DecisionFilters): string {
  const params = new URLSearchParams();
  if (filters.publisher) params.set("publisher", filters.publisher);
  if (filters.show !== undefined) params.set("show", String(filters.show));
  if (filters.source) params.set("source", filters.source);
  if (filters.since !== undefined) params.set("since", String(filters.since));
  params.set("page", String(filters.page ?? 1));
  params.set("page_size", String(filters.page_size ?? 20));
  return params.toString();
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AdviceApi {
  constructor(
    private settings: ApiSettings,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.settings.baseUrl.replace(/\/+$/, "") + path;
  }

  private headers(mutating: boolean): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (mutating && this.settings.adminToken) {
      headers["Authorization"] = `Bearer ${this.settings.adminToken}`;
    }
    return headers;
  }

  // Server rejections surface verbatim: detail string if present, raw text
  // otherwise.
  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.url(path), init);
    const text = await response.text();
    if (!response.ok) {
      let message = text;
      try {
        const body = JSON.parse(text);
        if (typeof body.detail === "string") message = body.detail;
        else if (body.detail !== undefined) message = JSON.stringify(body.detail);
      } catch {
        // non-JSON error body: keep raw text
      }
      throw new ApiError(response.status, message);
    }
    return JSON.parse(text) as T;
  }

  fetchDecisions(filters: DecisionFilters): Promise<DecisionsPage> {
    return this.request<DecisionsPage>(`/v1/decisions?${buildDecisionsQuery(filters)}`);
  }

  async getOverride(key: string): Promise<OverrideInfo | null> {
    try {
      return await this.request<OverrideInfo>(`/v1/overrides/${encodeURIComponent(key)}`);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) return null;
      throw error;
    }
  }

  putOverride(key: string, action: "suppress" | "force_entities", entities: string[]): Promise<OverrideInfo> {
    return this.request<OverrideInfo>("/v1/overrides", {
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

  deleteOverride(key: string): Promise<{ deleted: boolean }> {
    return this.request<{ deleted: boolean }>(`/v1/overrides/${encodeURIComponent(key)}`, {
      method: "DELETE",
      headers: this.headers(true),
    });
  }

  searchEntities(q: string, limit = 10): Promise<{ items: EntitySummary[] }> {
    const params = new URLSearchParams({ q, limit: String(limit) });
    return this.request<{ items: EntitySummary[] }>(`/v1/entities?${params.toString()}`);
  }

  health(): Promise<HealthInfo> {
    return this.request<HealthInfo>("/v1/health");
  }
}
