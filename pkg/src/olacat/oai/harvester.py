"""Harvester client: pull records from a provider, following pagination.

The transport is a plain callable `url -> bytes` so tests and the in-process
federation fixtures can short-circuit HTTP entirely; the default transport
uses urllib.  Transient transport failures are retried with exponential
backoff; in-band protocol errors other than an empty match are surfaced as
:class:`ProtocolError` naming the failed request.
"""

from __future__ import annotations

import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

from olacat.crosswalk import DcRecord
from olacat.record import OlacRecord, RefinementTable, default_refinements
from olacat.oai.provider import ProviderIdentity, RecordHeader, OAI_NS
from olacat.xmlio import (
    OAI_DC_NS,
    OLAC_NS,
    FatalParseError,
    _DcCollector,
    _NsHandler,
    _RecordCollector,
    _run_sax,
)


class TransportFailure(Exception):
    """A request could not be completed at the HTTP level."""


class ProviderUnreachable(Exception):
    """All transport attempts against a provider failed."""


class ProtocolError(Exception):
    """The provider answered, but not with a usable response."""

    def __init__(self, message: str, request: Optional[str] = None):
        super().__init__(message if request is None else f"{message} (request: {request})")
        self.request = request


@dataclass(frozen=True)
class HarvestWindow:
    """Datestamp window and payload format for one harvest run."""

    from_: Optional[str] = None
    until: Optional[str] = None
    format: str = "olac"

    def __post_init__(self):
        if self.from_ is not None and self.until is not None and self.from_ > self.until:
            raise ValueError("harvest window starts after it ends")
        if self.format not in ("olac", "oai_dc"):
            raise ValueError(f"unknown payload format {self.format!r}")


Transport = Callable[[str], bytes]


def default_transport(url: str, timeout: float = 30.0) -> bytes:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as response:
            if response.status != 200:
                raise TransportFailure(f"HTTP {response.status} from {url}")
            return response.read()
    except (urllib.error.URLError, OSError) as exc:
        raise TransportFailure(f"{exc} from {url}") from exc


def _fetch(url: str, transport: Transport, retries: int, backoff: float,
           sleep: Callable[[float], None]) -> bytes:
    last: Optional[Exception] = None
    for attempt in range(max(1, retries)):
        try:
            return transport(url)
        except TransportFailure as exc:
            last = exc
            if attempt + 1 < retries:
                sleep(backoff * (2 ** attempt))
    raise ProviderUnreachable(str(last))


# ---------------------------------------------------------------------------
# Response parsing


@dataclass
class _Response:
    response_date: Optional[str] = None
    error: Optional[tuple[str, str]] = None
    resumption_token: Optional[str] = None
    identify: Optional[dict] = None
    formats: Optional[list[dict]] = None
    items: Optional[list] = None  # (RecordHeader, record-or-None) pairs


class _ResponseHandler(_NsHandler):
    """Walks the protocol envelope and rebuilds headers and payloads."""

    _TEXT_FIELDS = {"repositoryName", "baseURL", "protocolVersion",
                    "adminEmail", "earliestDatestamp", "deletedRecord",
                    "granularity", "metadataPrefix", "schema", "metadataNamespace"}

    def __init__(self, refinements: RefinementTable):
        super().__init__()
        self._refinements = refinements
        self._path: list[tuple[Optional[str], str]] = []
        self._text: Optional[list[str]] = None
        self._text_key: Optional[str] = None
        self.response_date: Optional[str] = None
        self.error: Optional[tuple[str, str]] = None
        self.resumption_token: Optional[str] = None
        self.identify: dict = {}
        self.formats: list[dict] = []
        self.items: list = []
        self.diagnostics: list = []
        self._header: Optional[dict] = None
        self._pending_header: Optional[RecordHeader] = None
        self._format: Optional[dict] = None
        self._payload = None
        self._payload_depth = 0
        self._payload_record = None

    def _begin_text(self, key: str) -> None:
        self._text = []
        self._text_key = key

    def startElementNS(self, name, qname, attrs):
        self._path.append(name)
        depth = len(self._path)
        if self._payload is not None:
            self._payload.start(depth - self._payload_depth, name, attrs)
            return
        uri, local = name
        if depth == 1:
            if name != (OAI_NS, "OAI-PMH"):
                raise FatalParseError(f"unexpected response root {{{uri}}}{local}")
            return
        if uri == OAI_NS and local == "responseDate":
            self._begin_text("responseDate")
        elif uri == OAI_NS and local == "error":
            code = dict(attrs.items()).get((None, "code"), "")
            self.error = (code, "")
            self._begin_text("error")
        elif uri == OAI_NS and local == "resumptionToken":
            self._begin_text("resumptionToken")
        elif uri == OAI_NS and local == "header":
            status = dict(attrs.items()).get((None, "status"))
            self._header = {"deleted": status == "deleted",
                            "identifier": "", "datestamp": ""}
        elif uri == OAI_NS and local in ("identifier", "datestamp") and self._header is not None:
            self._begin_text(local)
        elif uri == OAI_NS and local == "metadataFormat":
            self._format = {}
        elif uri == OAI_NS and local in self._TEXT_FIELDS:
            self._begin_text(local)
        elif uri == OAI_NS and local == "metadata":
            self._payload_record = None
        elif depth >= 4 and self._path[depth - 2] == (OAI_NS, "metadata"):
            if name == (OLAC_NS, "olac"):
                self._payload = _RecordCollector(self, self.diagnostics, self._refinements)
            elif name == (OAI_DC_NS, "dc"):
                self._payload = _DcCollector(self, self.diagnostics)
            else:
                raise FatalParseError(f"unexpected metadata payload {{{uri}}}{local}")
            self._payload_depth = depth

    def characters(self, content):
        if self._payload is not None:
            self._payload.characters(content)
        elif self._text is not None:
            self._text.append(content)

    def endElementNS(self, name, qname):
        depth = len(self._path)
        if self._payload is not None:
            if depth > self._payload_depth:
                self._payload.end(depth - self._payload_depth)
                self._path.pop()
                return
            # the payload root itself is closing
            self._payload_record = self._payload.record()
            self._payload = None
            self._path.pop()
            return
        uri, local = name
        text = "".join(self._text) if self._text is not None else ""
        if self._text is not None and self._text_key == local:
            if self._text_key == "responseDate":
                self.response_date = text.strip()
            elif self._text_key == "error":
                self.error = (self.error[0], text.strip())
            elif self._text_key == "resumptionToken":
                self.resumption_token = text.strip()
            elif self._text_key in ("identifier", "datestamp") and self._header is not None:
                self._header[self._text_key] = text.strip()
            elif self._format is not None and self._text_key in self._TEXT_FIELDS:
                self._format[self._text_key] = text.strip()
            elif self._text_key in self._TEXT_FIELDS:
                self.identify[self._text_key] = text.strip()
            self._text = None
            self._text_key = None
        if uri == OAI_NS and local == "header" and self._header is not None:
            in_record = any(p == (OAI_NS, "record") for p in self._path)
            header = RecordHeader(
                identifier=self._header["identifier"] or "?",
                datestamp=self._header["datestamp"] or "1970-01-01",
                deleted=self._header["deleted"],
            )
            if in_record:
                self._pending_header = header
            else:
                self.items.append((header, None))
            self._header = None
        elif uri == OAI_NS and local == "record":
            if self._pending_header is None:
                raise FatalParseError("record without header in response")
            self.items.append((self._pending_header, self._payload_record))
            self._pending_header = None
            self._payload_record = None
        elif uri == OAI_NS and local == "metadataFormat" and self._format is not None:
            self.formats.append(self._format)
            self._format = None
        self._path.pop()


def parse_response(data: bytes, refinements: Optional[RefinementTable] = None) -> _Response:
    handler = _ResponseHandler(refinements or default_refinements())
    _run_sax(data, handler)
    return _Response(
        response_date=handler.response_date,
        error=handler.error,
        resumption_token=handler.resumption_token,
        identify=handler.identify,
        formats=handler.formats,
        items=handler.items,
    )


# ---------------------------------------------------------------------------
# Harvesting


def _request_url(base_url: str, params: dict[str, str]) -> str:
    separator = "&" if "?" in base_url else "?"
    return base_url + separator + urllib.parse.urlencode(params)


class Harvest:
    """Lazy record stream over a provider; iterate to pull pages.

    `response_date` holds the provider's timestamp from the first page once
    iteration has started — callers use it as the next incremental cursor.
    """

    def __init__(self, base_url: str, window: HarvestWindow, *,
                 transport: Optional[Transport] = None, retries: int = 3,
                 backoff: float = 0.5, sleep: Callable[[float], None] = time.sleep):
        self.base_url = base_url
        self.window = window
        self.response_date: Optional[str] = None
        self._transport = transport or default_transport
        self._retries = retries
        self._backoff = backoff
        self._sleep = sleep

    def __iter__(self) -> Iterator[tuple[RecordHeader, Union[OlacRecord, DcRecord, None]]]:
        params = {"verb": "ListRecords", "metadataPrefix": self.window.format}
        if self.window.from_ is not None:
            params["from"] = self.window.from_
        if self.window.until is not None:
            params["until"] = self.window.until
        while True:
            url = _request_url(self.base_url, params)
            data = _fetch(url, self._transport, self._retries, self._backoff, self._sleep)
            try:
                response = parse_response(data)
            except FatalParseError as exc:
                raise ProtocolError(f"unparseable response: {exc}", request=url) from None
            if self.response_date is None:
                self.response_date = response.response_date
            if response.error is not None:
                code, message = response.error
                if code == "noRecordsMatch":
                    return
                raise ProtocolError(f"{code}: {message}", request=url)
            yield from response.items or ()
            token = response.resumption_token
            if not token:
                return
            params = {"verb": "ListRecords", "resumptionToken": token}


def harvest(base_url: str, window: Optional[HarvestWindow] = None, *,
            transport: Optional[Transport] = None, retries: int = 3,
            backoff: float = 0.5, sleep: Callable[[float], None] = time.sleep) -> Harvest:
    """Harvest a provider; yields each in-window record exactly once."""
    return Harvest(base_url, window or HarvestWindow(), transport=transport,
                   retries=retries, backoff=backoff, sleep=sleep)


def identify(base_url: str, *, transport: Optional[Transport] = None,
             retries: int = 3, backoff: float = 0.5,
             sleep: Callable[[float], None] = time.sleep) -> ProviderIdentity:
    """Fetch and parse the provider's self-description."""
    url = _request_url(base_url, {"verb": "Identify"})
    data = _fetch(url, transport or default_transport, retries, backoff, sleep)
    try:
        response = parse_response(data)
    except FatalParseError as exc:
        raise ProtocolError(f"unparseable response: {exc}", request=url) from None
    if response.error is not None:
        raise ProtocolError(f"{response.error[0]}: {response.error[1]}", request=url)
    fields = response.identify or {}
    missing = {"repositoryName", "baseURL"} - set(fields)
    if missing:
        raise ProtocolError(f"identity is missing {sorted(missing)}", request=url)
    return ProviderIdentity(
        repository_name=fields["repositoryName"],
        base_url=fields["baseURL"],
        admin_email=fields.get("adminEmail", ""),
        earliest_datestamp=fields.get("earliestDatestamp", "1970-01-01"),
        protocol_version=fields.get("protocolVersion", "2.0"),
    )


def probe_provider(base_url: str, *, transport: Optional[Transport] = None
                   ) -> tuple[ProviderIdentity, list[str]]:
    """Identify a provider and cross-check its claims against its records.

    Returns the identity plus diagnostics, currently one check: the
    advertised earliest datestamp must not postdate any served record.
    """
    identity = identify(base_url, transport=transport)
    diagnostics: list[str] = []
    url = _request_url(base_url, {"verb": "ListIdentifiers", "metadataPrefix": "olac"})
    data = _fetch(url, transport or default_transport, 3, 0.5, time.sleep)
    try:
        response = parse_response(data)
    except FatalParseError as exc:
        raise ProtocolError(f"unparseable response: {exc}", request=url) from None
    if response.error is None and response.items:
        first = response.items[0][0].datestamp
        if identity.earliest_datestamp[:10] > first[:10]:
            diagnostics.append(
                f"advertised earliest datestamp {identity.earliest_datestamp} "
                f"postdates served record datestamp {first}")
    return identity, diagnostics
