/**
 * Facet selector controls.
 *
 * Every option comes verbatim from a facets API payload (value, label,
 * live count) — the UI adds nothing of its own. Selecting an option feeds
 * the chosen value back into the next query state.
 */

import type { FacetLists } from "./controller.js";
import { FACET_IDS, FACET_LABELS, type FacetId } from "./types.js";
import { withCriterion, type QueryState } from "./urlState.js";

export interface FacetHandlers {
  onChange(next: QueryState): void;
}

export function renderFacetControls(
  container: HTMLElement,
  facets: FacetLists,
  state: QueryState,
  handlers: FacetHandlers,
): void {
  container.textContent = "";
  container.classList.remove("facets--disabled");
  for (const facetId of FACET_IDS) {
    const payload = facets[facetId];
    if (!payload) {
      continue;
    }
    const group = document.createElement("fieldset");
    group.className = "facet-group";
    group.dataset.facet = facetId;

    const legend = document.createElement("legend");
    legend.textContent = FACET_LABELS[facetId];
    group.appendChild(legend);

    const select = document.createElement("select");
    select.className = "facet-group__select";
    select.setAttribute("aria-label", FACET_LABELS[facetId]);
    const blank = document.createElement("option");
    blank.value = "";
    blank.textContent = "(any)";
    select.appendChild(blank);
    for (const value of payload.values) {
      const option = document.createElement("option");
      option.value = value.value;
      option.textContent = `${value.label} (${value.count})`;
      option.dataset.count = String(value.count);
      select.appendChild(option);
    }
    const current = state[facetId];
    select.value = current;
    if (select.value !== current) {
      select.value = ""; // the state names a value absent from this snapshot
    }
    select.addEventListener("change", () => {
      handlers.onChange(withCriterion(state, facetId, select.value));
    });
    group.appendChild(select);
    container.appendChild(group);
  }
}

/** Error state: no stale options, controls visibly disabled. */
export function renderFacetControlsError(container: HTMLElement, message: string): void {
  container.textContent = "";
  container.classList.add("facets--disabled");
  const note = document.createElement("p");
  note.className = "facets__error";
  note.textContent = message;
  container.appendChild(note);
}
