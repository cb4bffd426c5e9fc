/**
 * Result list, paging, and per-query facet summary.
 *
 * Every rendered field is copied from an API item; rows expose their
 * archive/id via data attributes so tests can compare the list to the API
 * response item-for-item.
 */

import { PAGE_SIZE } from "./controller.js";
import { FACET_LABELS, type FacetCounts, type FacetId, type SearchItem, type SearchResponse } from "./types.js";
import { withCriterion, type CriteriaField, type QueryState } from "./urlState.js";

export interface ResultHandlers {
  onStateChange(next: QueryState): void;
  onOpenRecord(archive: string, id: string): void;
}

function renderItem(item: SearchItem, handlers: ResultHandlers): HTMLElement {
  const row = document.createElement("li");
  row.className = "result";
  row.dataset.archive = item.archive;
  row.dataset.id = item.id;

  const title = document.createElement("a");
  title.href = "#";
  title.className = "result__title";
  title.textContent = item.title || "(untitled)";
  title.addEventListener("click", (event) => {
    event.preventDefault();
    handlers.onOpenRecord(item.archive, item.id);
  });
  row.appendChild(title);

  const badge = document.createElement("span");
  badge.className = "result__archive";
  badge.textContent = item.archive;
  row.appendChild(badge);

  const meta = document.createElement("p");
  meta.className = "result__meta";
  meta.textContent = [item.language, item.type].filter(Boolean).join(" · ");
  row.appendChild(meta);

  if (item.snippet) {
    const snippet = document.createElement("p");
    snippet.className = "result__snippet";
    snippet.textContent = item.snippet;
    row.appendChild(snippet);
  }
  return row;
}

function renderFacetSummary(
  counts: FacetCounts,
  state: QueryState,
  handlers: ResultHandlers,
): HTMLElement {
  const summary = document.createElement("div");
  summary.className = "result-facets";
  for (const [facetId, values] of Object.entries(counts)) {
    const entries = Object.entries(values).sort(
      (a, b) => b[1] - a[1] || a[0].localeCompare(b[0]),
    );
    if (entries.length === 0) {
      continue;
    }
    const block = document.createElement("div");
    block.className = "result-facets__group";
    const heading = document.createElement("h3");
    heading.textContent = FACET_LABELS[facetId as FacetId] ?? facetId;
    block.appendChild(heading);
    const list = document.createElement("ul");
    for (const [value, count] of entries.slice(0, 8)) {
      const entry = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = `${value} (${count})`;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        handlers.onStateChange(
          withCriterion(state, facetId as CriteriaField, value),
        );
      });
      entry.appendChild(link);
      list.appendChild(entry);
    }
    block.appendChild(list);
    summary.appendChild(block);
  }
  return summary;
}

export function renderResults(
  container: HTMLElement,
  response: SearchResponse,
  state: QueryState,
  handlers: ResultHandlers,
): void {
  container.textContent = "";

  const status = document.createElement("p");
  status.className = "results__status";
  status.dataset.snapshot = response.snapshot;
  status.textContent = `${response.total} result(s)`;
  container.appendChild(status);

  if (response.total === 0) {
    const empty = document.createElement("p");
    empty.className = "results__empty";
    empty.textContent =
      "Nothing matched. Loosen a facet, or check the facet counts for nearby values.";
    container.appendChild(empty);
    return;
  }

  const list = document.createElement("ul");
  list.className = "results__list";
  for (const item of response.items) {
    list.appendChild(renderItem(item, handlers));
  }
  container.appendChild(list);

  const pager = document.createElement("nav");
  pager.className = "results__pager";
  if (state.offset > 0) {
    const previous = document.createElement("button");
    previous.textContent = "← Previous";
    previous.addEventListener("click", () => {
      handlers.onStateChange({
        ...state,
        offset: Math.max(0, state.offset - PAGE_SIZE),
      });
    });
    pager.appendChild(previous);
  }
  if (state.offset + response.items.length < response.total) {
    const next = document.createElement("button");
    next.textContent = "Next →";
    next.addEventListener("click", () => {
      handlers.onStateChange({ ...state, offset: state.offset + PAGE_SIZE });
    });
    pager.appendChild(next);
  }
  container.appendChild(pager);

  container.appendChild(renderFacetSummary(response.facets, state, handlers));
}

export function renderEmptyPrompt(container: HTMLElement): void {
  container.textContent = "";
  const prompt = document.createElement("p");
  prompt.className = "results__prompt";
  prompt.textContent =
    "Enter a search term or pick a facet to explore the union catalog.";
  container.appendChild(prompt);
}
