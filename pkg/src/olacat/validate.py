"""Conformance checking of records against the metadata-set semantics.

Structural validity gets a record into memory; conformance says whether its
coded values mean anything.  All problems are graded diagnostics, never
exceptions: vocabulary violations in accepted vocabularies and unparseable
language codes are errors, while open-ended conditions (unknown extension
codes, experimental qualifiers, codes without a qualifier) are warnings so
that experimentation stays possible.  The error/warning split is this
project's policy and is documented in docs/diagnostics.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from olacat.record import ENCODING_SCHEMES, OLAC_VOCABULARIES, MetadataElement, OlacRecord
from olacat.vocab import (
    MalformedTag,
    TermNotFound,
    VocabularyRegistry,
    default_registry,
    parse_language_code,
)
from olacat.xmlio import ERROR, WARNING, ParseDiagnostic, validate_w3cdtf

CONFORMANT = "conformant"
CONFORMANT_WITH_WARNINGS = "conformant-with-warnings"
NONCONFORMANT = "nonconformant"

# Closed rule table for conformance diagnostics.
VALIDATION_RULES = {
    "vocab.unknown-code": "code is not a member of the accepted vocabulary",
    "vocab.thirdparty-code": "code is not a member of the third-party vocabulary",
    "vocab.unknown-qualifier": "qualifier names no registered vocabulary or scheme",
    "lang.malformed": "language code does not parse",
    "lang.unknown": "well-formed language code not in the known-code table",
    "date.format": "content is not in the date-and-time format",
    "code.no-qualifier": "element carries a code but no qualifier",
    "refinement.with-vocabulary": "element carries both a refinement and a vocabulary qualifier",
}


@dataclass
class ConformanceReport:
    """Validation outcome for one record."""

    record_id: str
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if any(d.severity == ERROR for d in self.diagnostics):
            return NONCONFORMANT
        if self.diagnostics:
            return CONFORMANT_WITH_WARNINGS
        return CONFORMANT

    @property
    def conformant(self) -> bool:
        return self.verdict != NONCONFORMANT

    def to_text(self) -> str:
        lines = [f"{self.record_id}: {self.verdict}"]
        for d in self.diagnostics:
            lines.append(f"  {d.severity} [{d.rule}] {d.location}: {d.message}")
        return "\n".join(lines)

    def machine_lines(self) -> list[str]:
        return [d.machine_line() for d in self.diagnostics]


def _subject(index: int, element: MetadataElement) -> str:
    return f"element {index + 1} ({element.name})"


def _check_language_code(
    code: str,
    where: str,
    registry: VocabularyRegistry,
    diagnostics: list[ParseDiagnostic],
) -> None:
    try:
        parsed = parse_language_code(code)
    except MalformedTag as exc:
        diagnostics.append(ParseDiagnostic(
            ERROR, "lang.malformed", str(exc), subject=where))
        return
    # Membership is advisory: the extension scheme stays open, and no table
    # of three-letter codes ships, so only shapes we can know about warn.
    if parsed.scheme == "iso639-2":
        return
    if not registry.knows_language(parsed):
        diagnostics.append(ParseDiagnostic(
            WARNING, "lang.unknown",
            f"language code {code!r} is not in the known-code table",
            subject=where))


def validate(
    record: OlacRecord,
    registry: Optional[VocabularyRegistry] = None,
    record_id: str = "record",
) -> ConformanceReport:
    """Pure, deterministic conformance check of one record."""
    registry = registry or default_registry()
    diagnostics: list[ParseDiagnostic] = []
    for index, element in enumerate(record.elements):
        where = _subject(index, element)
        qualifier = element.qualifier
        if element.refinement is not None and qualifier in OLAC_VOCABULARIES:
            diagnostics.append(ParseDiagnostic(
                WARNING, "refinement.with-vocabulary",
                f"refinement {element.refinement!r} combined with vocabulary "
                f"qualifier {qualifier!r}", subject=where))
        if qualifier is None:
            if element.code is not None:
                diagnostics.append(ParseDiagnostic(
                    WARNING, "code.no-qualifier",
                    f"code {element.code!r} has no qualifier saying how to read it",
                    subject=where))
                if element.name == "language":
                    _check_language_code(element.code, where, registry, diagnostics)
        elif qualifier == "language":
            _check_language_code(element.code or "", where, registry, diagnostics)
        elif registry.has_vocabulary(qualifier):
            vocab = registry.vocabulary(qualifier)
            try:
                vocab.lookup(element.code or "")
            except TermNotFound:
                if vocab.status == "accepted":
                    diagnostics.append(ParseDiagnostic(
                        ERROR, "vocab.unknown-code",
                        f"code {element.code!r} is not in vocabulary {qualifier!r}",
                        subject=where))
                else:
                    diagnostics.append(ParseDiagnostic(
                        WARNING, "vocab.thirdparty-code",
                        f"code {element.code!r} is not in third-party vocabulary "
                        f"{qualifier!r}", subject=where))
        elif qualifier == "W3C-DTF":
            if element.content is not None and not validate_w3cdtf(element.content.strip()):
                diagnostics.append(ParseDiagnostic(
                    ERROR, "date.format",
                    f"content {element.content!r} is not in the date-and-time format",
                    subject=where))
        elif qualifier not in ENCODING_SCHEMES:
            diagnostics.append(ParseDiagnostic(
                WARNING, "vocab.unknown-qualifier",
                f"qualifier {qualifier!r} names no registered vocabulary or scheme",
                subject=where))
        if element.lang is not None and element.lang.scheme != "iso639-2" \
                and not registry.knows_language(element.lang):
            diagnostics.append(ParseDiagnostic(
                WARNING, "lang.unknown",
                f"content language {element.lang.raw!r} is not in the known-code table",
                subject=where))
    return ConformanceReport(record_id=record_id, diagnostics=diagnostics)


@dataclass
class BatchSummary:
    """Aggregate of many reports: counts per rule id and per severity."""

    records: int = 0
    errors: int = 0
    warnings: int = 0
    by_rule: dict[str, int] = field(default_factory=dict)
    nonconformant: int = 0

    def add(self, report: ConformanceReport) -> None:
        self.records += 1
        if report.verdict == NONCONFORMANT:
            self.nonconformant += 1
        self.add_diagnostics(report.diagnostics)

    def add_diagnostics(self, diagnostics: Iterable[ParseDiagnostic]) -> None:
        """Count loose diagnostics (e.g. parse problems) without a record."""
        for d in diagnostics:
            if d.severity == ERROR:
                self.errors += 1
            else:
                self.warnings += 1
            self.by_rule[d.rule] = self.by_rule.get(d.rule, 0) + 1

    def to_text(self) -> str:
        lines = [
            f"records: {self.records}",
            f"errors: {self.errors}",
            f"warnings: {self.warnings}",
            f"nonconformant: {self.nonconformant}",
        ]
        for rule in sorted(self.by_rule):
            lines.append(f"  {rule}: {self.by_rule[rule]}")
        return "\n".join(lines)


def validate_batch(
    records: Iterable[tuple[str, OlacRecord]],
    registry: Optional[VocabularyRegistry] = None,
) -> BatchSummary:
    """Validate a stream; the summary equals the union of per-record reports."""
    registry = registry or default_registry()
    summary = BatchSummary()
    for record_id, record in records:
        summary.add(validate(record, registry, record_id=record_id))
    return summary
