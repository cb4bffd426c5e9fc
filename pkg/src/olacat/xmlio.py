"""XML reading and writing for metadata records and record streams.

Parsing is namespace-aware end to end: element namespaces and the QName
values of `xsi:type` attributes are resolved through in-scope declarations,
never by literal prefix text.  Serialization is byte-stable (two-space
indent, fixed attribute order `xsi:type`, `code`, `xml:lang`) so exported
documents can be compared against golden files.

Three document shapes are handled here:

* a standalone record: `olac:olac` root in the record namespace;
* a record stream: an `olac:catalog` container of `olac:entry` elements,
  each carrying provenance attributes and an optional record body (either
  a full record or its simple-DC form) — the catalog export format;
* a simple-DC record: `oai_dc:dc` with bare `dc:*` children.
"""

from __future__ import annotations

import io
import re
import xml.sax
import xml.sax.handler
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Optional, Union
from xml.sax.saxutils import escape, quoteattr

from olacat.crosswalk import DcElement, DcRecord
from olacat.record import (
    DC_ELEMENTS,
    ENCODING_SCHEMES,
    InvariantViolation,
    MetadataElement,
    OlacRecord,
    RefinementTable,
    default_refinements,
)
from olacat.vocab import MalformedTag, parse_language_code

OLAC_NS = "http://www.language-archives.org/OLAC/1.0/"
DC_NS = "http://purl.org/dc/elements/1.1/"
DCTERMS_NS = "http://purl.org/dc/terms/"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"
XML_NS = "http://www.w3.org/XML/1998/namespace"
OAI_DC_NS = "http://www.openarchives.org/OAI/2.0/oai_dc/"

SCHEMA_LOCATION = f"{OLAC_NS} {OLAC_NS}olac.xsd"
OAI_DC_SCHEMA_LOCATION = (
    "http://www.openarchives.org/OAI/2.0/oai_dc/ "
    "http://www.openarchives.org/OAI/2.0/oai_dc.xsd"
)

ERROR = "error"
WARNING = "warning"

# Closed rule table for parse diagnostics; conformance checking has its own
# table in olacat.validate.  Both are documented in docs/diagnostics.md.
PARSE_RULES = {
    "xml.malformed": "document is not well-formed XML",
    "xml.root": "root element is not the expected container",
    "record.stray-text": "non-whitespace text directly inside the record container",
    "element.unknown": "child element is not a Dublin Core element",
    "element.unknown-refinement": "dcterms element is not in the refinement table",
    "element.nested": "metadata elements must not contain child elements",
    "element.bad-xsi-type": "xsi:type prefix undeclared or not a vocabulary/scheme namespace",
    "element.bad-lang": "xml:lang value is not a valid language tag",
    "element.unknown-attribute": "unknown attribute dropped",
    "element.vocab-needs-code": "vocabulary qualifier requires a code attribute",
    "element.empty": "element carries neither code nor content",
    "stream.bad-entry": "stream entry is malformed and was skipped",
}

_ESCAPE_CONTENT = {"\r": "&#13;"}


class FatalParseError(ValueError):
    """Malformed XML, wrong root, or another unrecoverable input problem."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class ParseDiagnostic:
    """One graded problem found while reading or checking a record.

    `line`/`column` locate problems in XML input; `subject` names the
    element for diagnostics produced away from a document (conformance
    checking reuses this shape).
    """

    severity: str
    rule: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None
    subject: Optional[str] = None

    @property
    def location(self) -> str:
        if self.line is not None:
            return f"{self.line}:{self.column if self.column is not None else 0}"
        return self.subject or "-"

    def machine_line(self) -> str:
        return "\t".join([self.severity, self.rule, self.location, self.message])


def _errors(diagnostics: Iterable[ParseDiagnostic]) -> list[ParseDiagnostic]:
    return [d for d in diagnostics if d.severity == ERROR]


# ---------------------------------------------------------------------------
# SAX machinery


class _Fatal(Exception):
    """Internal signal: abort the SAX parse with a FatalParseError."""

    def __init__(self, message: str):
        super().__init__(message)


class _NsHandler(xml.sax.handler.ContentHandler):
    """Base handler tracking prefix scopes and the document locator."""

    def __init__(self):
        super().__init__()
        self._locator = None
        self._prefixes: list[tuple[Optional[str], Optional[str]]] = []

    def setDocumentLocator(self, locator):
        self._locator = locator

    def loc(self) -> tuple[Optional[int], Optional[int]]:
        if self._locator is None:
            return None, None
        line = self._locator.getLineNumber()
        column = self._locator.getColumnNumber()
        return (line if line != -1 else None, column if column != -1 else None)

    def startPrefixMapping(self, prefix, uri):
        self._prefixes.append((prefix, uri))

    def endPrefixMapping(self, prefix):
        for i in range(len(self._prefixes) - 1, -1, -1):
            if self._prefixes[i][0] == prefix:
                del self._prefixes[i]
                return

    def resolve_prefix(self, prefix: Optional[str]) -> Optional[str]:
        for known, uri in reversed(self._prefixes):
            if known == prefix:
                return uri
        if prefix is None:
            return None  # no default namespace in scope
        if prefix == "xml":
            return XML_NS
        return None

    def resolve_qname_value(self, value: str) -> Optional[tuple[Optional[str], str]]:
        """Resolve a QName-valued attribute through in-scope declarations."""
        if ":" in value:
            prefix, local = value.split(":", 1)
            uri = self.resolve_prefix(prefix)
            if uri is None:
                return None
            return uri, local
        return self.resolve_prefix(None), value


class _RecordCollector:
    """Accumulates metadata elements for one record subtree.

    Driven by a handler that reports element starts/ends at depths relative
    to the record root (depth 1 = a metadata element).  Problems become
    error diagnostics and the offending element is skipped.
    """

    def __init__(self, handler: _NsHandler, diagnostics: list[ParseDiagnostic],
                 refinements: RefinementTable):
        self._handler = handler
        self._diagnostics = diagnostics
        self._refinements = refinements
        self._elements: list[MetadataElement] = []
        self._current: Optional[dict] = None

    def _diag(self, severity: str, rule: str, message: str) -> None:
        line, column = self._handler.loc()
        self._diagnostics.append(
            ParseDiagnostic(severity, rule, message, line=line, column=column)
        )

    def start(self, rel_depth: int, name: tuple[Optional[str], str], attrs) -> None:
        if rel_depth > 1:
            if self._current is not None and not self._current["nested"]:
                self._current["nested"] = True
                self._current["skip"] = True
                self._diag(ERROR, "element.nested",
                           f"element {self._current['name']!r} contains child elements")
            return
        uri, local = name
        current = {
            "name": None, "refinement": None, "qualifier": None,
            "code": None, "lang": None, "text": [],
            "skip": False, "nested": False,
        }
        self._current = current
        if uri == DC_NS and local in DC_ELEMENTS:
            current["name"] = local
        elif uri == DCTERMS_NS:
            parent = self._refinements.parent_of(local)
            if parent is None:
                self._diag(ERROR, "element.unknown-refinement",
                           f"unknown refinement {local!r}")
                current["skip"] = True
                return
            current["name"] = parent
            current["refinement"] = local
        else:
            self._diag(ERROR, "element.unknown",
                       f"unexpected element {{{uri}}}{local}")
            current["skip"] = True
            return
        for (attr_uri, attr_local), value in attrs.items():
            if attr_uri == XSI_NS and attr_local == "type":
                resolved = self._handler.resolve_qname_value(value)
                if resolved is None or resolved[0] not in (OLAC_NS, DCTERMS_NS):
                    self._diag(ERROR, "element.bad-xsi-type",
                               f"cannot resolve xsi:type {value!r}")
                    current["skip"] = True
                else:
                    current["qualifier"] = resolved[1]
            elif attr_local == "code" and attr_uri in (None, OLAC_NS):
                current["code"] = value
            elif attr_uri == XML_NS and attr_local == "lang":
                try:
                    current["lang"] = parse_language_code(value)
                except MalformedTag as exc:
                    self._diag(ERROR, "element.bad-lang", str(exc))
                    current["skip"] = True
            else:
                self._diag(WARNING, "element.unknown-attribute",
                           f"attribute {{{attr_uri}}}{attr_local} dropped")

    def characters(self, text: str) -> None:
        if self._current is not None:
            self._current["text"].append(text)

    def end(self, rel_depth: int) -> None:
        if rel_depth > 1 or self._current is None:
            return
        current, self._current = self._current, None
        if current["skip"]:
            return
        content: Optional[str] = "".join(current["text"])
        if not content.strip():
            content = None
        try:
            self._elements.append(MetadataElement(
                name=current["name"],
                refinement=current["refinement"],
                qualifier=current["qualifier"],
                code=current["code"],
                lang=current["lang"],
                content=content,
            ))
        except InvariantViolation as exc:
            rule = ("element.vocab-needs-code"
                    if current["code"] is None and current["qualifier"] else "element.empty")
            self._diag(ERROR, rule, str(exc))

    def record(self) -> OlacRecord:
        return OlacRecord(tuple(self._elements))


class _DcCollector:
    """Accumulates bare DC elements for one oai_dc:dc subtree."""

    def __init__(self, handler: _NsHandler, diagnostics: list[ParseDiagnostic]):
        self._handler = handler
        self._diagnostics = diagnostics
        self._elements: list[DcElement] = []
        self._current: Optional[dict] = None

    def start(self, rel_depth: int, name: tuple[Optional[str], str], attrs) -> None:
        if rel_depth > 1:
            return
        uri, local = name
        current = {"name": None, "lang": None, "text": [], "skip": False}
        self._current = current
        if uri != DC_NS or local not in DC_ELEMENTS:
            line, column = self._handler.loc()
            self._diagnostics.append(ParseDiagnostic(
                ERROR, "element.unknown",
                f"unexpected element {{{uri}}}{local}", line=line, column=column))
            current["skip"] = True
            return
        current["name"] = local
        for (attr_uri, attr_local), value in attrs.items():
            if attr_uri == XML_NS and attr_local == "lang":
                try:
                    current["lang"] = parse_language_code(value)
                except MalformedTag:
                    current["lang"] = None

    def characters(self, text: str) -> None:
        if self._current is not None:
            self._current["text"].append(text)

    def end(self, rel_depth: int) -> None:
        if rel_depth > 1 or self._current is None:
            return
        current, self._current = self._current, None
        if current["skip"]:
            return
        self._elements.append(DcElement(
            name=current["name"],
            lang=current["lang"],
            content="".join(current["text"]),
        ))

    def record(self) -> DcRecord:
        return DcRecord(tuple(self._elements))


class _SingleRecordHandler(_NsHandler):
    """Parses a standalone record document (olac:olac root)."""

    def __init__(self, refinements: RefinementTable):
        super().__init__()
        self.diagnostics: list[ParseDiagnostic] = []
        self._collector: Optional[_RecordCollector] = None
        self._refinements = refinements
        self._depth = 0

    def startElementNS(self, name, qname, attrs):
        self._depth += 1
        if self._depth == 1:
            if name != (OLAC_NS, "olac"):
                raise _Fatal(
                    f"root element must be olac:olac in {OLAC_NS}, got "
                    f"{{{name[0]}}}{name[1]}")
            self._collector = _RecordCollector(self, self.diagnostics, self._refinements)
        else:
            self._collector.start(self._depth - 1, name, attrs)

    def characters(self, content):
        if self._depth >= 2:
            self._collector.characters(content)
        elif self._depth == 1 and content.strip():
            line, column = self.loc()
            self.diagnostics.append(ParseDiagnostic(
                WARNING, "record.stray-text",
                "text outside metadata elements ignored", line=line, column=column))

    def endElementNS(self, name, qname):
        if self._depth >= 2:
            self._collector.end(self._depth - 1)
        self._depth -= 1

    def record(self) -> OlacRecord:
        return self._collector.record() if self._collector else OlacRecord()


def _run_sax(data: Union[bytes, str], handler: _NsHandler) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    parser = xml.sax.make_parser()
    parser.setFeature(xml.sax.handler.feature_namespaces, True)
    parser.setContentHandler(handler)
    parser.setErrorHandler(xml.sax.handler.ErrorHandler())
    try:
        parser.parse(io.BytesIO(data))
    except _Fatal as exc:
        line, column = handler.loc()
        raise FatalParseError(str(exc), line=line, column=column) from None
    except xml.sax.SAXParseException as exc:
        raise FatalParseError(
            f"not well-formed XML: {exc.getMessage()}",
            line=exc.getLineNumber(), column=exc.getColumnNumber()) from None


def parse_record(
    data: Union[bytes, str],
    refinements: Optional[RefinementTable] = None,
) -> tuple[OlacRecord, list[ParseDiagnostic]]:
    """Parse a standalone record document.

    Element-level problems become error diagnostics and the element is
    skipped; only a malformed document or a wrong root raises
    :class:`FatalParseError`.
    """
    handler = _SingleRecordHandler(refinements or default_refinements())
    _run_sax(data, handler)
    return handler.record(), handler.diagnostics


# ---------------------------------------------------------------------------
# Serialization


def _qualifier_qname(qualifier: str) -> str:
    if qualifier in ENCODING_SCHEMES:
        return f"dcterms:{qualifier}"
    return f"olac:{qualifier}"


def _element_line(element: MetadataElement, pad: str) -> str:
    tag = f"dcterms:{element.refinement}" if element.refinement else element.name
    parts = [tag]
    if element.qualifier is not None:
        parts.append(f"xsi:type={quoteattr(_qualifier_qname(element.qualifier))}")
    if element.code is not None:
        parts.append(f"code={quoteattr(element.code)}")
    if element.lang is not None:
        parts.append(f"xml:lang={quoteattr(element.lang.raw)}")
    open_tag = " ".join(parts)
    if element.content is None:
        return f"{pad}<{open_tag}/>"
    return f"{pad}<{open_tag}>{escape(element.content, _ESCAPE_CONTENT)}</{tag}>"


def record_lines(record: OlacRecord, depth: int = 0, indent: str = "  ") -> list[str]:
    """Serialized record as indented lines (no XML declaration).

    The root always declares the record, DC, DC-terms and schema-instance
    namespaces plus the schema location, so the fragment stays
    self-contained wherever it is embedded.
    """
    pad = indent * depth
    root = (
        f"{pad}<olac:olac xmlns:olac={quoteattr(OLAC_NS)}"
        f" xmlns={quoteattr(DC_NS)}"
        f" xmlns:dcterms={quoteattr(DCTERMS_NS)}"
        f" xmlns:xsi={quoteattr(XSI_NS)}"
        f" xsi:schemaLocation={quoteattr(SCHEMA_LOCATION)}"
    )
    if not record.elements:
        return [root + "/>"]
    lines = [root + ">"]
    child_pad = indent * (depth + 1)
    for element in record.elements:
        lines.append(_element_line(element, child_pad))
    lines.append(f"{pad}</olac:olac>")
    return lines


def serialize_record(record: OlacRecord) -> bytes:
    """Byte-stable standalone document for one record.

    ``parse_record(serialize_record(r))`` reproduces ``r`` exactly for any
    record whose content fields are either None or non-whitespace text
    (whitespace-only content is read back as absent by design).
    """
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.extend(record_lines(record))
    return ("\n".join(lines) + "\n").encode("utf-8")


def dc_lines(dc: DcRecord, depth: int = 0, indent: str = "  ") -> list[str]:
    """Serialized simple-DC record as indented lines."""
    pad = indent * depth
    root = (
        f"{pad}<oai_dc:dc xmlns:oai_dc={quoteattr(OAI_DC_NS)}"
        f" xmlns:dc={quoteattr(DC_NS)}"
        f" xmlns:xsi={quoteattr(XSI_NS)}"
        f" xsi:schemaLocation={quoteattr(OAI_DC_SCHEMA_LOCATION)}"
    )
    if not dc.elements:
        return [root + "/>"]
    lines = [root + ">"]
    child_pad = indent * (depth + 1)
    for element in dc.elements:
        attrs = ""
        if element.lang is not None:
            attrs = f" xml:lang={quoteattr(element.lang.raw)}"
        lines.append(
            f"{child_pad}<dc:{element.name}{attrs}>"
            f"{escape(element.content, _ESCAPE_CONTENT)}</dc:{element.name}>"
        )
    lines.append(f"{pad}</oai_dc:dc>")
    return lines


def serialize_dc(dc: DcRecord) -> bytes:
    """Standalone simple-DC document in the oai_dc container shape."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.extend(dc_lines(dc))
    return ("\n".join(lines) + "\n").encode("utf-8")


class _DcDocHandler(_NsHandler):
    """Parses a standalone oai_dc:dc document."""

    def __init__(self):
        super().__init__()
        self.diagnostics: list[ParseDiagnostic] = []
        self._collector: Optional[_DcCollector] = None
        self._depth = 0

    def startElementNS(self, name, qname, attrs):
        self._depth += 1
        if self._depth == 1:
            if name != (OAI_DC_NS, "dc"):
                raise _Fatal(
                    f"root element must be dc in {OAI_DC_NS}, got "
                    f"{{{name[0]}}}{name[1]}")
            self._collector = _DcCollector(self, self.diagnostics)
        else:
            self._collector.start(self._depth - 1, name, attrs)

    def characters(self, content):
        if self._depth >= 2:
            self._collector.characters(content)

    def endElementNS(self, name, qname):
        if self._depth >= 2:
            self._collector.end(self._depth - 1)
        self._depth -= 1

    def record(self) -> DcRecord:
        return self._collector.record() if self._collector else DcRecord()


def parse_dc(data: Union[bytes, str]) -> tuple[DcRecord, list[ParseDiagnostic]]:
    """Parse a standalone simple-DC document."""
    handler = _DcDocHandler()
    _run_sax(data, handler)
    return handler.record(), handler.diagnostics


# ---------------------------------------------------------------------------
# Record streams (catalog export format)


@dataclass(frozen=True)
class StreamEntry:
    """One record in a stream, with its provenance header."""

    archive: str
    identifier: str
    datestamp: str
    deleted: bool = False
    record: Union[OlacRecord, DcRecord, None] = None


def write_stream(entries: Iterable[StreamEntry], out: BinaryIO) -> None:
    """Write entries as one well-formed container document."""
    out.write(b'<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write((
        f"<olac:catalog xmlns:olac={quoteattr(OLAC_NS)}"
        f" xmlns={quoteattr(DC_NS)}"
        f" xmlns:dcterms={quoteattr(DCTERMS_NS)}"
        f" xmlns:xsi={quoteattr(XSI_NS)}>\n"
    ).encode("utf-8"))
    for entry in entries:
        status = "deleted" if entry.deleted else "active"
        head = (
            f"  <olac:entry archive={quoteattr(entry.archive)}"
            f" identifier={quoteattr(entry.identifier)}"
            f" datestamp={quoteattr(entry.datestamp)}"
            f" status={quoteattr(status)}"
        )
        if entry.record is None:
            out.write((head + "/>\n").encode("utf-8"))
            continue
        body = (record_lines(entry.record, depth=2)
                if isinstance(entry.record, OlacRecord) else dc_lines(entry.record, depth=2))
        out.write((head + ">\n").encode("utf-8"))
        out.write(("\n".join(body) + "\n").encode("utf-8"))
        out.write(b"  </olac:entry>\n")
    out.write(b"</olac:catalog>\n")


def stream_to_bytes(entries: Iterable[StreamEntry]) -> bytes:
    buffer = io.BytesIO()
    write_stream(entries, buffer)
    return buffer.getvalue()


class _StreamHandler(_NsHandler):
    """Parses a container document of record entries."""

    def __init__(self, refinements: RefinementTable):
        super().__init__()
        self.entries: list[StreamEntry] = []
        self.diagnostics: list[ParseDiagnostic] = []
        self._refinements = refinements
        self._depth = 0
        self._entry: Optional[dict] = None
        self._collector = None
        self._body_kind: Optional[str] = None

    def _diag(self, severity: str, rule: str, message: str) -> None:
        line, column = self.loc()
        self.diagnostics.append(
            ParseDiagnostic(severity, rule, message, line=line, column=column))

    def startElementNS(self, name, qname, attrs):
        self._depth += 1
        if self._depth == 1:
            if name != (OLAC_NS, "catalog"):
                raise _Fatal(
                    f"root element must be olac:catalog in {OLAC_NS}, got "
                    f"{{{name[0]}}}{name[1]}")
            return
        if self._depth == 2:
            self._entry = None
            self._collector = None
            self._body_kind = None
            if name != (OLAC_NS, "entry"):
                self._diag(ERROR, "stream.bad-entry",
                           f"unexpected element {{{name[0]}}}{name[1]}")
                return
            fields = {}
            for (attr_uri, attr_local), value in attrs.items():
                if attr_uri is None:
                    fields[attr_local] = value
            missing = {"archive", "identifier", "datestamp"} - set(fields)
            if missing:
                self._diag(ERROR, "stream.bad-entry",
                           f"entry missing attributes: {sorted(missing)}")
                return
            self._entry = {
                "archive": fields["archive"],
                "identifier": fields["identifier"],
                "datestamp": fields["datestamp"],
                "deleted": fields.get("status", "active") == "deleted",
            }
            return
        if self._depth == 3:
            if self._entry is None:
                return
            if name == (OLAC_NS, "olac"):
                self._body_kind = "olac"
                self._collector = _RecordCollector(self, self.diagnostics, self._refinements)
            elif name == (OAI_DC_NS, "dc"):
                self._body_kind = "dc"
                self._collector = _DcCollector(self, self.diagnostics)
            else:
                self._diag(ERROR, "stream.bad-entry",
                           f"unexpected entry body {{{name[0]}}}{name[1]}")
                self._entry = None
            return
        if self._collector is not None:
            self._collector.start(self._depth - 3, name, attrs)

    def characters(self, content):
        if self._depth >= 4 and self._collector is not None:
            self._collector.characters(content)

    def endElementNS(self, name, qname):
        if self._depth >= 4 and self._collector is not None:
            self._collector.end(self._depth - 3)
        elif self._depth == 2 and self._entry is not None:
            record = self._collector.record() if self._collector is not None else None
            self.entries.append(StreamEntry(
                archive=self._entry["archive"],
                identifier=self._entry["identifier"],
                datestamp=self._entry["datestamp"],
                deleted=self._entry["deleted"],
                record=record,
            ))
            self._entry = None
            self._collector = None
        self._depth -= 1


def read_stream(
    data: Union[bytes, str],
    refinements: Optional[RefinementTable] = None,
) -> tuple[list[StreamEntry], list[ParseDiagnostic]]:
    """Parse a container document back into stream entries."""
    handler = _StreamHandler(refinements or default_refinements())
    _run_sax(data, handler)
    return handler.entries, handler.diagnostics


def sniff_root(data: Union[bytes, str]) -> Optional[tuple[Optional[str], str]]:
    """(namespace, local name) of the document's root element, if any."""
    import xml.parsers.expat

    if isinstance(data, str):
        data = data.encode("utf-8")
    parser = xml.parsers.expat.ParserCreate(namespace_separator=" ")
    found: list[tuple[Optional[str], str]] = []

    class _Stop(Exception):
        pass

    def on_start(name, _attrs):
        parts = name.split(" ")
        found.append((parts[0], parts[1]) if len(parts) == 2 else (None, parts[0]))
        raise _Stop()

    parser.StartElementHandler = on_start
    try:
        parser.Parse(data, True)
    except _Stop:
        pass
    except xml.parsers.expat.ExpatError:
        return found[0] if found else None
    return found[0] if found else None


# ---------------------------------------------------------------------------
# W3C date and time format


_W3CDTF = re.compile(
    r"^(?P<year>\d{4})"
    r"(?:-(?P<month>\d{2})"
    r"(?:-(?P<day>\d{2})"
    r"(?:T(?P<hour>\d{2}):(?P<minute>\d{2})"
    r"(?::(?P<second>\d{2})(?:\.\d+)?)?"
    r"(?P<tz>Z|[+-]\d{2}:\d{2}))?"
    r")?)?$"
)


def validate_w3cdtf(text: str) -> bool:
    """True iff `text` matches one of the date-and-time profiles.

    Accepted: YYYY, YYYY-MM, YYYY-MM-DD, and the two timed profiles with a
    mandatory zone designator (minutes, optionally seconds and fractions).
    """
    match = _W3CDTF.match(text or "")
    if not match:
        return False
    month, day = match.group("month"), match.group("day")
    hour, minute, second = match.group("hour"), match.group("minute"), match.group("second")
    if month is not None and not 1 <= int(month) <= 12:
        return False
    if day is not None and not 1 <= int(day) <= 31:
        return False
    if hour is not None and int(hour) > 23:
        return False
    if minute is not None and int(minute) > 59:
        return False
    if second is not None and int(second) > 59:
        return False
    tz = match.group("tz")
    if tz and tz != "Z":
        if int(tz[1:3]) > 23 or int(tz[4:6]) > 59:
            return False
    return True
