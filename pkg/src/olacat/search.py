"""Faceted query engine over a catalog snapshot.

The engine exists to fix the two classic failures of free-text search over
language resources: name variants losing matches (recall) and everyday
words drowning coded ones (precision).  Facet criteria therefore match by
code equivalence class, never by substring; language names typed by the
user are resolved through the alias table and expanded to the union of
their codes; free text is tokenized, case-folded and unstemmed.

Matching rules, in full (the brute-force oracle in the tests mirrors them):

* every present criterion must match (conjunction across criteria);
* `free_text` matches when at least one query token occurs in the record's
  element content; the number of distinct matching tokens is the score;
* `language` matches records whose `language` element codes fall in the
  queried code's equivalence class; `subject_language` does the same for
  `subject` elements carrying the language qualifier;
* vocabulary facets match canonical codes; `archive` matches the entry's
  archive id; `dc_type` matches the normalized content of unqualified
  `type` elements;
* `role` alone matches any element coded with that role; `name` alone
  matches creator/contributor content (normalized equality); `role` and
  `name` together must co-occur on one element;
* ranking is total: score descending, then key ascending.

The index is immutable once built and is rebuilt per catalog snapshot;
queries never observe entries from later snapshots.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from typing import Optional

from olacat.catalog import CatalogSnapshot
from olacat.record import OLAC_VOCABULARIES, OlacRecord
from olacat.vocab import (
    MalformedTag,
    TermNotFound,
    VocabularyRegistry,
    default_registry,
    normalize_name,
    normalize_term,
    parse_language_code,
)

SNIPPET_LENGTH = 160


class SearchError(Exception):
    pass


class EmptyQuery(SearchError):
    """A query with no criteria at all."""


class UnknownFacet(SearchError):
    pass


FACET_IDS = ("subject_language", "language", "linguistic_type",
             "discourse_type", "linguistic_field", "role", "archive", "dc_type")

_VOCAB_FACETS = {
    "linguistic_type": "linguistic-type",
    "discourse_type": "discourse-type",
    "linguistic_field": "linguistic-field",
    "role": "role",
}

_WORD = re.compile(r"\w+")


def tokenize(text: str) -> list[str]:
    """Case-folded word tokens; no stemming, by design."""
    return _WORD.findall(text.casefold())


@dataclass(frozen=True)
class Query:
    """One search request; all criteria are optional but not all absent."""

    free_text: Optional[str] = None
    subject_language: Optional[str] = None
    language: Optional[str] = None
    linguistic_type: Optional[str] = None
    discourse_type: Optional[str] = None
    linguistic_field: Optional[str] = None
    role: Optional[str] = None
    name: Optional[str] = None
    archive: Optional[str] = None
    dc_type: Optional[str] = None

    @property
    def is_empty(self) -> bool:
        return all(getattr(self, f.name) in (None, "") for f in fields(self))


@dataclass(frozen=True)
class ResultItem:
    archive: str
    identifier: str
    score: int
    title: str
    language: str
    type: str
    snippet: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.archive, self.identifier)


@dataclass(frozen=True)
class FacetValue:
    value: str
    label: str
    count: int


@dataclass(frozen=True)
class ResultSet:
    snapshot: str
    total: int
    items: tuple[ResultItem, ...]
    facets: dict[str, dict[str, int]]


def _class_representative(code_text: str, registry: VocabularyRegistry) -> Optional[str]:
    try:
        return registry.equivalences.representative(parse_language_code(code_text))
    except MalformedTag:
        return None


def _vocab_value(facet_id: str, raw: str, registry: VocabularyRegistry) -> str:
    vocab_id = _VOCAB_FACETS[facet_id]
    try:
        return registry.lookup_term(vocab_id, raw).code
    except TermNotFound:
        return normalize_term(raw)


def _collapse(text: str) -> str:
    return " ".join(text.split())


@dataclass(eq=True)
class SearchIndex:
    """Inverted postings per facet and per free-text token.

    Keys are catalog entry keys (archive, identifier); deleted entries are
    never indexed.  Building the same snapshot twice yields an equal index.
    """

    snapshot_id: str
    text: dict[str, set] = field(default_factory=dict)
    facets: dict[str, dict[str, set]] = field(default_factory=dict)
    entry_facets: dict[tuple, dict[str, set]] = field(default_factory=dict)
    role_names: dict[tuple, set] = field(default_factory=dict)
    names: dict[str, set] = field(default_factory=dict)
    meta: dict[tuple, dict] = field(default_factory=dict)
    dc_type_display: dict[str, str] = field(default_factory=dict)

    def keys(self) -> set:
        return set(self.meta)


def _extract_facets(record: OlacRecord, archive: str,
                    registry: VocabularyRegistry) -> dict[str, set[str]]:
    values: dict[str, set[str]] = {"archive": {archive}}
    for element in record.elements:
        qualifier = element.qualifier
        if element.name == "subject" and qualifier == "language" and element.code:
            rep = _class_representative(element.code, registry)
            if rep is not None:
                values.setdefault("subject_language", set()).add(rep)
        elif element.name == "language" and element.code:
            rep = _class_representative(element.code, registry)
            if rep is not None:
                values.setdefault("language", set()).add(rep)
        if qualifier in ("linguistic-type", "discourse-type", "linguistic-field", "role") \
                and element.code is not None:
            facet_id = qualifier.replace("-", "_")
            values.setdefault(facet_id, set()).add(
                _vocab_value(facet_id, element.code, registry))
        if element.name == "type" and qualifier not in OLAC_VOCABULARIES \
                and element.content is not None:
            values.setdefault("dc_type", set()).add(
                _collapse(element.content).casefold())
    return values


def _entry_meta(record: OlacRecord, registry: VocabularyRegistry) -> dict:
    title = record.first_content("title") or ""
    language = ""
    for element in record.elements_of("language"):
        if element.code:
            try:
                language = registry.language_label(element.code)
            except MalformedTag:
                language = element.code
            break
    type_label = ""
    for element in record.elements_of("type"):
        if element.qualifier == "linguistic-type" and element.code:
            try:
                type_label = registry.lookup_term("linguistic-type", element.code).label
            except TermNotFound:
                type_label = element.code
            break
        if element.qualifier not in OLAC_VOCABULARIES and element.content:
            type_label = type_label or _collapse(element.content)
    snippet = _collapse(record.first_content("description") or "")[:SNIPPET_LENGTH] or title
    return {"title": _collapse(title), "language": language,
            "type": type_label, "snippet": snippet}


def build_index(snapshot: CatalogSnapshot,
                registry: Optional[VocabularyRegistry] = None) -> SearchIndex:
    """Deterministic index over one snapshot's non-deleted entries."""
    registry = registry or default_registry()
    index = SearchIndex(snapshot_id=snapshot.version)
    for facet_id in FACET_IDS:
        index.facets[facet_id] = {}
    for key in sorted(snapshot.entries):
        entry = snapshot.entries[key]
        if entry.deleted or entry.record is None:
            continue
        record = entry.record
        facet_values = _extract_facets(record, entry.archive, registry)
        index.entry_facets[key] = facet_values
        for facet_id, values in facet_values.items():
            postings = index.facets[facet_id]
            for value in values:
                postings.setdefault(value, set()).add(key)
        for element in record.elements:
            if element.content is not None:
                for token in set(tokenize(element.content)):
                    index.text.setdefault(token, set()).add(key)
            if element.name == "type" and element.qualifier not in OLAC_VOCABULARIES \
                    and element.content is not None:
                normalized = _collapse(element.content).casefold()
                index.dc_type_display.setdefault(normalized, _collapse(element.content))
            if element.qualifier == "role" and element.code is not None \
                    and element.content is not None:
                role_value = _vocab_value("role", element.code, registry)
                index.role_names.setdefault(
                    (role_value, normalize_name(element.content)), set()).add(key)
            if element.name in ("creator", "contributor") and element.content is not None:
                index.names.setdefault(normalize_name(element.content), set()).add(key)
        index.meta[key] = _entry_meta(record, registry)
    return index


def _language_criterion_keys(index: SearchIndex, facet_id: str, value: str,
                             registry: VocabularyRegistry) -> set:
    """Expand a name or code to its codes and collect matching entries."""
    codes = registry.aliases.resolve(value)
    representatives: set[str] = set()
    if codes:
        for code in codes:
            representatives.add(registry.equivalences.representative(code))
    else:
        rep = _class_representative(value, registry)
        if rep is not None:
            representatives.add(rep)
    matched: set = set()
    for rep in representatives:
        matched |= index.facets[facet_id].get(rep, set())
    return matched


def execute(index: SearchIndex, query: Query,
            registry: Optional[VocabularyRegistry] = None) -> ResultSet:
    """Run one query against one index; total order over results."""
    registry = registry or default_registry()
    if query.is_empty:
        raise EmptyQuery("at least one criterion is required")
    criteria: list[set] = []
    scores: dict[tuple, int] = {}

    if query.free_text:
        token_hits: dict[tuple, int] = {}
        for token in set(tokenize(query.free_text)):
            for key in index.text.get(token, ()):
                token_hits[key] = token_hits.get(key, 0) + 1
        scores = token_hits
        criteria.append(set(token_hits))
    for facet_id in ("subject_language", "language"):
        value = getattr(query, facet_id)
        if value:
            criteria.append(_language_criterion_keys(index, facet_id, value, registry))
    for facet_id in ("linguistic_type", "discourse_type", "linguistic_field"):
        value = getattr(query, facet_id)
        if value:
            canonical = _vocab_value(facet_id, value, registry)
            criteria.append(index.facets[facet_id].get(canonical, set()))
    if query.role and query.name:
        criteria.append(index.role_names.get(
            (_vocab_value("role", query.role, registry), normalize_name(query.name)),
            set()))
    elif query.role:
        criteria.append(index.facets["role"].get(
            _vocab_value("role", query.role, registry), set()))
    elif query.name:
        criteria.append(index.names.get(normalize_name(query.name), set()))
    if query.archive:
        criteria.append(index.facets["archive"].get(query.archive, set()))
    if query.dc_type:
        criteria.append(index.facets["dc_type"].get(
            _collapse(query.dc_type).casefold(), set()))

    matched = set.intersection(*criteria) if criteria else set()
    ranked = sorted(matched, key=lambda key: (-scores.get(key, 0), key))
    items = tuple(
        ResultItem(archive=key[0], identifier=key[1],
                   score=scores.get(key, 0), **index.meta[key])
        for key in ranked
    )
    facet_counts: dict[str, dict[str, int]] = {}
    for key in matched:
        for facet_id, values in index.entry_facets.get(key, {}).items():
            bucket = facet_counts.setdefault(facet_id, {})
            for value in values:
                bucket[value] = bucket.get(value, 0) + 1
    facets = {
        facet_id: dict(sorted(facet_counts[facet_id].items()))
        for facet_id in sorted(facet_counts)
    }
    return ResultSet(snapshot=index.snapshot_id, total=len(items),
                     items=items, facets=facets)


def _facet_label(facet_id: str, value: str, registry: VocabularyRegistry,
                 index: SearchIndex) -> str:
    if facet_id in ("subject_language", "language"):
        try:
            return registry.language_label(value)
        except MalformedTag:
            return value
    if facet_id in _VOCAB_FACETS:
        try:
            return registry.lookup_term(_VOCAB_FACETS[facet_id], value).label
        except (TermNotFound, MalformedTag):
            return value
    if facet_id == "dc_type":
        return index.dc_type_display.get(value, value)
    return value


def facet_values(index: SearchIndex, facet_id: str,
                 registry: Optional[VocabularyRegistry] = None) -> list[FacetValue]:
    """All values of one facet over the whole snapshot, with labels and counts."""
    registry = registry or default_registry()
    if facet_id not in FACET_IDS:
        raise UnknownFacet(f"unknown facet {facet_id!r}")
    postings = index.facets[facet_id]
    values = [
        FacetValue(value=value,
                   label=_facet_label(facet_id, value, registry, index),
                   count=len(keys))
        for value, keys in postings.items()
    ]
    values.sort(key=lambda v: (-v.count, v.value))
    return values


def result_to_json(result: ResultSet, *, offset: int = 0,
                   limit: Optional[int] = None) -> dict:
    """The JSON shape served by the API and printed by the CLI."""
    end = offset + limit if limit is not None else None
    window = result.items[offset:end]
    return {
        "snapshot": result.snapshot,
        "total": result.total,
        "items": [
            {"archive": item.archive, "id": item.identifier, "title": item.title,
             "language": item.language, "type": item.type, "snippet": item.snippet}
            for item in window
        ],
        "facets": result.facets,
    }


def facets_to_json(index: SearchIndex, facet_id: str,
                   registry: Optional[VocabularyRegistry] = None) -> dict:
    return {
        "snapshot": index.snapshot_id,
        "facet": facet_id,
        "values": [
            {"value": v.value, "label": v.label, "count": v.count}
            for v in facet_values(index, facet_id, registry)
        ],
    }
