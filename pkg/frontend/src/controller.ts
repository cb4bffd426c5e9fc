/**
 * Search orchestration, kept free of DOM concerns so it is testable.
 *
 * Two consistency rules live here:
 *
 * - every fetch round carries a generation number; responses arriving
 *   after a newer round has started are dropped, never rendered;
 * - result and facet payloads are only rendered together when they carry
 *   the same catalog snapshot; on a mismatch the whole round is refetched
 *   (bounded), never blended.
 */

import { ApiClient } from "./api.js";
import { FACET_IDS, type FacetId, type FacetsResponse, type RecordResponse, type SearchResponse } from "./types.js";
import { isEmpty, type QueryState } from "./urlState.js";

export const PAGE_SIZE = 20;
const SNAPSHOT_RETRIES = 3;

export type FacetLists = Record<FacetId, FacetsResponse>;

export interface SearchView {
  renderPrompt(): void;
  renderLoading(): void;
  renderSearch(response: SearchResponse, facets: FacetLists, state: QueryState): void;
  renderError(message: string): void;
  renderRecord(record: RecordResponse): void;
  renderRecordError(message: string): void;
}

export class SearchController {
  private generation = 0;
  private recordGeneration = 0;
  private facetCache: { snapshot: string; lists: FacetLists } | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly view: SearchView,
  ) {}

  /** Runs one search round for `state`; empty criteria never hit the API. */
  async refresh(state: QueryState): Promise<void> {
    if (isEmpty(state)) {
      this.generation += 1;
      this.view.renderPrompt();
      return;
    }
    const generation = ++this.generation;
    this.view.renderLoading();
    try {
      for (let attempt = 0; attempt < SNAPSHOT_RETRIES; attempt += 1) {
        const response = await this.api.search(state, PAGE_SIZE);
        if (generation !== this.generation) return;
        const lists = await this.facetLists(response.snapshot);
        if (generation !== this.generation) return;
        if (lists !== null) {
          this.view.renderSearch(response, lists, state);
          return;
        }
      }
      this.view.renderError("catalog snapshot kept changing; try again");
    } catch (error) {
      if (generation === this.generation) {
        this.view.renderError(String(error));
      }
    }
  }

  /** All facet value lists for one snapshot, or null on a mismatch. */
  private async facetLists(snapshot: string): Promise<FacetLists | null> {
    if (this.facetCache !== null && this.facetCache.snapshot === snapshot) {
      return this.facetCache.lists;
    }
    const responses = await Promise.all(FACET_IDS.map((id) => this.api.facets(id)));
    const lists = {} as FacetLists;
    for (const response of responses) {
      if (response.snapshot !== snapshot) {
        return null;
      }
      lists[response.facet as FacetId] = response;
    }
    this.facetCache = { snapshot, lists };
    return lists;
  }

  async openRecord(archive: string, id: string): Promise<void> {
    const generation = ++this.recordGeneration;
    try {
      const record = await this.api.record(archive, id);
      if (generation === this.recordGeneration) {
        this.view.renderRecord(record);
      }
    } catch (error) {
      if (generation === this.recordGeneration) {
        this.view.renderRecordError(String(error));
      }
    }
  }
}
