/** Shapes of the JSON search API. Field names are the server contract. */

export interface SearchItem {
  archive: string;
  id: string;
  title: string;
  language: string;
  type: string;
  snippet: string;
}

export type FacetCounts = Record<string, Record<string, number>>;

export interface SearchResponse {
  snapshot: string;
  total: number;
  items: SearchItem[];
  facets: FacetCounts;
}

export interface FacetValue {
  value: string;
  label: string;
  count: number;
}

export interface FacetsResponse {
  snapshot: string;
  facet: string;
  values: FacetValue[];
}

export interface DisplayLine {
  label: string;
  text: string;
}

export interface RecordResponse {
  snapshot: string;
  archive: string;
  id: string;
  datestamp: string;
  display: DisplayLine[];
  html: string;
  xml: string;
}

/** Facet ids the API serves, in UI display order. */
export const FACET_IDS = [
  "linguistic_type",
  "discourse_type",
  "linguistic_field",
  "subject_language",
  "language",
  "role",
  "archive",
  "dc_type",
] as const;

export type FacetId = (typeof FACET_IDS)[number];

export const FACET_LABELS: Record<FacetId, string> = {
  linguistic_type: "Linguistic type",
  discourse_type: "Discourse type",
  linguistic_field: "Linguistic field",
  subject_language: "Subject language",
  language: "Language",
  role: "Role",
  archive: "Archive",
  dc_type: "Resource type",
};
