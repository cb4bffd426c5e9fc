/**
 * Application shell: wires URL state, the controller, and the DOM.
 *
 * The URL is the single source of query state. Every user action produces
 * a new state, which is pushed to the history and then rendered; the back
 * button replays old states through the same path.
 */

import { ApiClient } from "./api.js";
import { PAGE_SIZE, SearchController, type FacetLists, type SearchView } from "./controller.js";
import { renderFacetControls, renderFacetControlsError } from "./facets.js";
import { renderRecordError, renderRecordPanel } from "./record.js";
import { renderEmptyPrompt, renderResults } from "./results.js";
import type { RecordResponse, SearchResponse } from "./types.js";
import {
  fromSearchParams,
  statesEqual,
  toSearchParams,
  type QueryState,
} from "./urlState.js";

export function mountApp(root: HTMLElement, api: ApiClient = new ApiClient()): {
  setState(next: QueryState, push?: boolean): void;
  controller: SearchController;
} {
  root.innerHTML = `
    <header class="topbar">
      <h1>Language archive search</h1>
      <form class="searchbar" id="searchbar">
        <input type="search" id="free-text" name="free_text"
               placeholder="Search titles, descriptions, names…" />
        <input type="text" id="language-box" name="language"
               placeholder="Language name or code" />
        <button type="submit">Search</button>
      </form>
    </header>
    <main class="layout">
      <aside id="facets" class="facets" aria-label="Facets"></aside>
      <section id="results" class="results" aria-live="polite"></section>
    </main>
    <section id="record" class="record" hidden></section>
    <p id="status" class="statusline" hidden></p>
  `;
  const facetsBox = root.querySelector<HTMLElement>("#facets")!;
  const resultsBox = root.querySelector<HTMLElement>("#results")!;
  const recordBox = root.querySelector<HTMLElement>("#record")!;
  const statusLine = root.querySelector<HTMLElement>("#status")!;
  const freeText = root.querySelector<HTMLInputElement>("#free-text")!;
  const languageBox = root.querySelector<HTMLInputElement>("#language-box")!;

  let current = fromSearchParams(
    new URLSearchParams(window.location.search),
  );

  const view: SearchView = {
    renderPrompt() {
      renderFacetControlsError(facetsBox, "Search to load facet counts.");
      renderEmptyPrompt(resultsBox);
      statusLine.hidden = true;
    },
    renderLoading() {
      statusLine.hidden = false;
      statusLine.textContent = "Searching…";
    },
    renderSearch(response: SearchResponse, facets: FacetLists, state: QueryState) {
      statusLine.hidden = false;
      statusLine.textContent = `snapshot ${response.snapshot}`;
      renderFacetControls(facetsBox, facets, state, { onChange: setState });
      renderResults(resultsBox, response, state, {
        onStateChange: setState,
        onOpenRecord: (archive, id) => void controller.openRecord(archive, id),
      });
    },
    renderError(message: string) {
      statusLine.hidden = true;
      renderFacetControlsError(facetsBox, "Facets unavailable.");
      resultsBox.textContent = "";
      const banner = document.createElement("p");
      banner.className = "results__error";
      banner.textContent = message;
      resultsBox.appendChild(banner);
    },
    renderRecord(record: RecordResponse) {
      renderRecordPanel(recordBox, record, () => undefined);
    },
    renderRecordError(message: string) {
      renderRecordError(recordBox, message);
    },
  };

  const controller = new SearchController(api, view);

  function syncForm(state: QueryState): void {
    freeText.value = state.free_text;
    languageBox.value = state.language;
  }

  function setState(next: QueryState, push = true): void {
    if (push && !statesEqual(next, current)) {
      const query = toSearchParams(next).toString();
      window.history.pushState(null, "", query ? `?${query}` : window.location.pathname);
    }
    current = next;
    syncForm(next);
    void controller.refresh(next);
  }

  root.querySelector<HTMLFormElement>("#searchbar")!.addEventListener(
    "submit",
    (event) => {
      event.preventDefault();
      setState({
        ...current,
        free_text: freeText.value.trim(),
        language: languageBox.value.trim(),
        offset: 0,
      });
    },
  );

  window.addEventListener("popstate", () => {
    setState(fromSearchParams(new URLSearchParams(window.location.search)), false);
  });

  setState(current, false);
  return { setState, controller };
}

export { PAGE_SIZE };

declare global {
  interface Window {
    olacatApp?: ReturnType<typeof mountApp>;
  }
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  window.olacatApp = mountApp(document.getElementById("app")!);
}
