/** Thin typed client over the CAPE read-only HTTP API. */

import type {
  ActorsResponse,
  DocumentsResponse,
  GraphResponse,
  SuggestResponse,
  TimelineResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    const response = await this.fetchImpl(`${this.baseUrl}${path}${query}`);
    if (!response.ok) {
      let message = `${response.status}`;
      try {
        const body = await response.json();
        message = body.message ?? message;
      } catch {
        // non-JSON error body: keep the status code
      }
      throw new Error(`request failed: ${message}`);
    }
    return (await response.json()) as T;
  }

  suggest(q: string): Promise<SuggestResponse> {
    return this.get<SuggestResponse>("/suggest", { q });
  }

  patternGraph(patternId: string): Promise<GraphResponse> {
    return this.get<GraphResponse>(`/patterns/${encodeURIComponent(patternId)}/graph`);
  }

  patternActors(patternId: string): Promise<ActorsResponse> {
    // The store re-orders client side; the service always returns the
    // descending ranking.
    return this.get<ActorsResponse>(
      `/patterns/${encodeURIComponent(patternId)}/actors`,
      { sort: "desc" },
    );
  }

  patternDocuments(patternId: string, offset = 0, limit = 50): Promise<DocumentsResponse> {
    return this.get<DocumentsResponse>(
      `/patterns/${encodeURIComponent(patternId)}/documents`,
      { offset: String(offset), limit: String(limit) },
    );
  }

  patternTimeline(patternId: string, granularity: "year" | "month"): Promise<TimelineResponse> {
    return this.get<TimelineResponse>(
      `/patterns/${encodeURIComponent(patternId)}/timeline`,
      { granularity },
    );
  }
}
