"""Qualified Dublin Core record model for language-resource metadata.

A record is an ordered, repeatable list of metadata elements.  Each element
carries the Dublin Core element name, an optional DC-terms refinement, an
optional qualifier (a controlled-vocabulary id or an encoding-scheme id),
an optional coded value, an optional content language, and optional free
text.  All types here are immutable values: they can be shared between
threads and reused across transformations without copying.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from olacat.vocab import LanguageCode

DC_ELEMENTS = (
    "title",
    "creator",
    "subject",
    "description",
    "publisher",
    "contributor",
    "date",
    "type",
    "format",
    "identifier",
    "source",
    "language",
    "relation",
    "coverage",
    "rights",
)

_DC_ELEMENT_SET = frozenset(DC_ELEMENTS)

# Vocabulary qualifiers whose selected value lives in the element's code
# attribute.  A qualifier from this set without a code is rejected.
OLAC_VOCABULARIES = frozenset(
    {"role", "linguistic-type", "discourse-type", "linguistic-field", "language"}
)

# Encoding-scheme qualifiers: they describe the notation of the element
# content and never require a code attribute.
ENCODING_SCHEMES = frozenset({"W3C-DTF", "DCMIType", "URI", "IMT", "RFC3066"})


class InvariantViolation(ValueError):
    """A record or element breaks one of the structural rules."""


def require_element_name(name: str) -> str:
    """Return `name` if it is one of the 15 Dublin Core element names."""
    if name not in _DC_ELEMENT_SET:
        raise InvariantViolation(f"not a Dublin Core element name: {name!r}")
    return name


class RefinementTable:
    """Closed table of DC-terms refinements, each owned by one parent element.

    The table is data-driven so new refinements can be added without code
    changes; the file format is one `refinement<TAB>parent-element` pair per
    line, UTF-8, `#` comments and blank lines ignored.
    """

    def __init__(self, entries: Iterable[tuple[str, str]]):
        table: dict[str, str] = {}
        for refinement, parent in entries:
            require_element_name(parent)
            if refinement in table and table[refinement] != parent:
                raise InvariantViolation(
                    f"refinement {refinement!r} mapped to two parents"
                )
            table[refinement] = parent
        self._table = table

    @classmethod
    def from_file(cls, path: str | Path) -> "RefinementTable":
        entries = []
        for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InvariantViolation(
                    f"{path}:{lineno}: expected 'refinement<TAB>parent', got {line!r}"
                )
            entries.append((parts[0].strip(), parts[1].strip()))
        return cls(entries)

    def parent_of(self, refinement: str) -> Optional[str]:
        return self._table.get(refinement)

    def __contains__(self, refinement: str) -> bool:
        return refinement in self._table

    def __iter__(self):
        return iter(sorted(self._table.items()))

    def __len__(self) -> int:
        return len(self._table)


_default_refinements: Optional[RefinementTable] = None


def default_refinements() -> RefinementTable:
    """The refinement table shipped with the package (lazily loaded)."""
    global _default_refinements
    if _default_refinements is None:
        with resources.as_file(
            resources.files("olacat.data").joinpath("refinements.tsv")
        ) as path:
            _default_refinements = RefinementTable.from_file(path)
    return _default_refinements


def set_default_refinements(table: RefinementTable) -> None:
    """Install a custom refinement table as the process-wide default.

    Intended for startup configuration only; element construction reads the
    default table, so swapping it after records exist is the caller's risk.
    """
    global _default_refinements
    _default_refinements = table


@dataclass(frozen=True)
class MetadataElement:
    """One element instance of a metadata record.

    Structural invariants, enforced at construction:

    * `name` is one of the 15 Dublin Core element names;
    * a refinement's parent element equals `name`;
    * a vocabulary qualifier (one of OLAC_VOCABULARIES) requires `code`;
    * at least one of `code` and `content` is present.

    Content is stored verbatim, surrounding whitespace included; trimming is
    a parser or crosswalk concern.  An element with a code but no qualifier
    is structurally fine and flagged by conformance validation instead.
    """

    name: str
    refinement: Optional[str] = None
    qualifier: Optional[str] = None
    code: Optional[str] = None
    lang: Optional[LanguageCode] = None
    content: Optional[str] = None

    def __post_init__(self):
        require_element_name(self.name)
        if self.refinement is not None:
            parent = default_refinements().parent_of(self.refinement)
            if parent is None:
                raise InvariantViolation(f"unknown refinement: {self.refinement!r}")
            if parent != self.name:
                raise InvariantViolation(
                    f"refinement {self.refinement!r} belongs to {parent!r}, "
                    f"not {self.name!r}"
                )
        if self.qualifier in OLAC_VOCABULARIES and self.code is None:
            raise InvariantViolation(
                f"qualifier {self.qualifier!r} selects a vocabulary value, "
                "so a code is required"
            )
        if self.code is None and self.content is None:
            raise InvariantViolation("element carries neither code nor content")


@dataclass(frozen=True)
class OlacRecord:
    """An ordered multiset of metadata elements describing one resource.

    Every element name is optional and repeatable; element order is
    significant and preserved through all transformations.
    """

    elements: tuple[MetadataElement, ...] = ()

    def add(self, element: MetadataElement) -> "OlacRecord":
        """Return a new record with `element` appended."""
        if not isinstance(element, MetadataElement):
            raise InvariantViolation("not a MetadataElement")
        return OlacRecord(self.elements + (element,))

    def elements_of(self, name: str) -> list[MetadataElement]:
        """All instances with the given element name, in record order."""
        require_element_name(name)
        return [e for e in self.elements if e.name == name]

    def first_content(self, name: str) -> Optional[str]:
        """Content of the first element with the given name, if any."""
        for e in self.elements_of(name):
            if e.content is not None:
                return e.content
        return None

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def add_element(record: OlacRecord, element: MetadataElement) -> OlacRecord:
    """Functional form of :meth:`OlacRecord.add`."""
    return record.add(element)


def elements_of(record: OlacRecord, name: str) -> list[MetadataElement]:
    """Functional form of :meth:`OlacRecord.elements_of`."""
    return record.elements_of(name)
