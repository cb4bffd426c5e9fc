/**
 * Thin typed client over the JSON API. The fetch function is injectable so
 * tests can fake the transport; every non-2xx or unparseable response is
 * surfaced as an ApiError with the request path.
 */

import type { FacetsResponse, RecordResponse, SearchResponse } from "./types.js";
import { toSearchParams, type QueryState } from "./urlState.js";

export type FetchLike = (url: string) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly path: string,
    readonly status?: number,
  ) {
    super(`${message} (${path})`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path);
    } catch (error) {
      throw new ApiError(`request failed: ${String(error)}`, path);
    }
    if (!response.ok) {
      throw new ApiError("request rejected", path, response.status);
    }
    try {
      return (await response.json()) as T;
    } catch {
      throw new ApiError("response is not JSON", path, response.status);
    }
  }

  search(state: QueryState, limit: number): Promise<SearchResponse> {
    const params = toSearchParams(state);
    params.set("offset", String(state.offset));
    params.set("limit", String(limit));
    return this.getJson<SearchResponse>(`/api/search?${params.toString()}`);
  }

  facets(facetId: string): Promise<FacetsResponse> {
    return this.getJson<FacetsResponse>(`/api/facets/${encodeURIComponent(facetId)}`);
  }

  record(archive: string, id: string): Promise<RecordResponse> {
    const path =
      `/api/record/${encodeURIComponent(archive)}/${encodeURIComponent(id)}`;
    return this.getJson<RecordResponse>(path);
  }
}
