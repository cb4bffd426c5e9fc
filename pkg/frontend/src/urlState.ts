/**
 * Query state bound to the URL query string.
 *
 * The mapping is a bijection: `fromSearchParams(toSearchParams(s))` yields
 * a state deep-equal to `s` for every valid state, so any search is a
 * shareable link. Empty fields are omitted from the URL; `offset` is kept
 * only when non-zero.
 */

export interface QueryState {
  free_text: string;
  subject_language: string;
  language: string;
  linguistic_type: string;
  discourse_type: string;
  linguistic_field: string;
  role: string;
  name: string;
  archive: string;
  dc_type: string;
  offset: number;
}

export const CRITERIA_FIELDS = [
  "free_text",
  "subject_language",
  "language",
  "linguistic_type",
  "discourse_type",
  "linguistic_field",
  "role",
  "name",
  "archive",
  "dc_type",
] as const;

export type CriteriaField = (typeof CRITERIA_FIELDS)[number];

export function emptyState(): QueryState {
  return {
    free_text: "",
    subject_language: "",
    language: "",
    linguistic_type: "",
    discourse_type: "",
    linguistic_field: "",
    role: "",
    name: "",
    archive: "",
    dc_type: "",
    offset: 0,
  };
}

export function isEmpty(state: QueryState): boolean {
  return CRITERIA_FIELDS.every((field) => state[field] === "");
}

export function toSearchParams(state: QueryState): URLSearchParams {
  const params = new URLSearchParams();
  for (const field of CRITERIA_FIELDS) {
    if (state[field] !== "") {
      params.set(field, state[field]);
    }
  }
  if (state.offset > 0) {
    params.set("offset", String(state.offset));
  }
  return params;
}

export function fromSearchParams(params: URLSearchParams): QueryState {
  const state = emptyState();
  for (const field of CRITERIA_FIELDS) {
    const value = params.get(field);
    if (value !== null) {
      state[field] = value;
    }
  }
  const offset = Number.parseInt(params.get("offset") ?? "0", 10);
  state.offset = Number.isFinite(offset) && offset > 0 ? offset : 0;
  return state;
}

export function statesEqual(a: QueryState, b: QueryState): boolean {
  return (
    CRITERIA_FIELDS.every((field) => a[field] === b[field]) &&
    a.offset === b.offset
  );
}

/** A narrowed copy: one facet set to a value, paging reset. */
export function withCriterion(
  state: QueryState,
  field: CriteriaField,
  value: string,
): QueryState {
  return { ...state, [field]: value, offset: 0 };
}
