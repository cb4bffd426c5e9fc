"""Crosswalks from qualified records to simple DC and to display form.

Dumb-down collapses refinements to their parent elements and replaces coded
values with their human labels, so generic consumers see nothing but the 15
bare elements.  Display rendering produces labelled lines for end users.
Both transformations are total: they never fail on a structurally valid
record, and unknown codes pass through verbatim wrapped in square brackets
(the rendering marker for an unresolvable code).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

from olacat.record import OLAC_VOCABULARIES, MetadataElement, OlacRecord
from olacat.vocab import (
    LanguageCode,
    MalformedTag,
    TermNotFound,
    UnknownVocabulary,
    VocabularyRegistry,
    default_registry,
)


@dataclass(frozen=True)
class DcElement:
    """One bare Dublin Core element: name, optional language, text."""

    name: str
    lang: Optional[LanguageCode] = None
    content: str = ""


@dataclass(frozen=True)
class DcRecord:
    """A simple-DC record: bare elements only, no qualifiers or codes."""

    elements: tuple[DcElement, ...] = ()

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class DisplayLine:
    label: str
    text: str


@dataclass(frozen=True)
class DisplayDocument:
    """Human-readable rendering: one labelled line per source element."""

    lines: tuple[DisplayLine, ...] = ()

    def __len__(self) -> int:
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)


def _code_label(element: MetadataElement, registry: VocabularyRegistry) -> str:
    """Human label for an element's coded value; `[code]` when unresolvable."""
    code = element.code or ""
    qualifier = element.qualifier
    if qualifier == "language" or (qualifier is None and element.name == "language"):
        try:
            name = registry.resolved_language_name(code)
        except MalformedTag:
            return f"[{code}]"
        return name if name is not None else f"[{code}]"
    if qualifier is not None and registry.has_vocabulary(qualifier):
        try:
            return registry.lookup_term(qualifier, code).label
        except (TermNotFound, UnknownVocabulary):
            return f"[{code}]"
    return f"[{code}]"


def _rendered_value(element: MetadataElement, registry: VocabularyRegistry) -> str:
    """Combine a coded value's label with the free-text elaboration."""
    if element.code is not None:
        label = _code_label(element, registry)
        if element.content is not None:
            return f"{label} ({element.content.strip()})"
        return label
    return element.content or ""


def to_simple_dc(record: OlacRecord, registry: Optional[VocabularyRegistry] = None) -> DcRecord:
    """Dumb-down: exactly one bare element per source element, in order.

    Refinements collapse to their parents, coded values become labels, and
    when both a code and content are present the output is `label (content)`.
    Languages of the content survive (simple DC allows them).
    """
    registry = registry or default_registry()
    elements = tuple(
        DcElement(name=e.name, lang=e.lang, content=_rendered_value(e, registry))
        for e in record.elements
    )
    return DcRecord(elements)


def lift_simple_dc(dc: DcRecord) -> OlacRecord:
    """Embed a simple-DC record back into the qualified model (bare elements)."""
    return OlacRecord(tuple(
        MetadataElement(name=e.name, lang=e.lang, content=e.content)
        for e in dc.elements
    ))


def _humanize(token: str) -> str:
    return token.replace("-", " ").replace("_", " ").title()


def _display_label(element: MetadataElement) -> str:
    suffixes = []
    if element.refinement is not None:
        suffixes.append(_humanize(element.refinement))
    if element.qualifier in OLAC_VOCABULARIES:
        suffixes.append(_humanize(element.qualifier))
    label = element.name.title()
    if suffixes:
        label += f" ({', '.join(suffixes)})"
    return label


def render_display(record: OlacRecord, registry: Optional[VocabularyRegistry] = None) -> DisplayDocument:
    """One display line per element; coded values and refinements humanized."""
    registry = registry or default_registry()
    lines = []
    for element in record.elements:
        text = _rendered_value(element, registry)
        if element.lang is not None:
            text = f"{text} [{element.lang.raw}]"
        lines.append(DisplayLine(label=_display_label(element), text=text))
    return DisplayDocument(tuple(lines))


def display_to_text(document: DisplayDocument) -> str:
    return "\n".join(f"{line.label}: {line.text}" for line in document.lines)


def display_to_html(document: DisplayDocument) -> str:
    """Minimal HTML fragment (a definition list) for embedding in the UI."""
    parts = ['<dl class="record">']
    for line in document.lines:
        parts.append(f"  <dt>{escape(line.label)}</dt>")
        parts.append(f"  <dd>{escape(line.text)}</dd>")
    parts.append("</dl>")
    return "\n".join(parts)
