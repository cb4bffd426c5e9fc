"""Data-provider endpoint: six harvesting verbs over a record source.

The provider is a pure request handler: one call maps protocol parameters
to one XML response, against an immutable snapshot of the record source.
It keeps no session state; list pagination is carried entirely by signed
resumption tokens (query, cursor, snapshot id, expiry), so a crashed or
restarted provider never serves a stale continuation — the token simply
stops verifying and the client restarts its harvest.

The exact wire shapes, parameter rules, and error classes are documented
in docs/protocol.md; the golden files under tests/fixtures/golden are the
reference rendering.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Iterable, Optional, Protocol, Sequence, Union
from xml.sax.saxutils import escape, quoteattr

from olacat.crosswalk import to_simple_dc
from olacat.record import InvariantViolation, OlacRecord
from olacat.vocab import VocabularyRegistry, default_registry
from olacat.xmlio import OAI_DC_NS, OLAC_NS, XSI_NS, dc_lines, record_lines, validate_w3cdtf

OAI_NS = "http://www.openarchives.org/OAI/2.0/"
OAI_SCHEMA_LOCATION = (
    "http://www.openarchives.org/OAI/2.0/ "
    "http://www.openarchives.org/OAI/2.0/OAI-PMH.xsd"
)

VERBS = ("Identify", "ListMetadataFormats", "ListSets",
         "ListIdentifiers", "ListRecords", "GetRecord")

ERROR_CODES = ("badVerb", "badArgument", "idDoesNotExist",
               "noRecordsMatch", "cannotDisseminateFormat", "badResumptionToken")

METADATA_FORMATS = {
    "olac": (f"{OLAC_NS}olac.xsd", OLAC_NS),
    "oai_dc": ("http://www.openarchives.org/OAI/2.0/oai_dc.xsd", OAI_DC_NS),
}

_DAY = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_SECOND = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")

_ARG_ORDER = ("identifier", "metadataPrefix", "from", "until", "set", "resumptionToken")

_VERB_ARGS = {
    "Identify": frozenset(),
    "ListMetadataFormats": frozenset({"identifier"}),
    "ListSets": frozenset({"resumptionToken"}),
    "ListIdentifiers": frozenset({"metadataPrefix", "from", "until", "set", "resumptionToken"}),
    "ListRecords": frozenset({"metadataPrefix", "from", "until", "set", "resumptionToken"}),
    "GetRecord": frozenset({"identifier", "metadataPrefix"}),
}


@dataclass(frozen=True)
class ProviderIdentity:
    """Static facts a repository reports about itself."""

    repository_name: str
    base_url: str
    admin_email: str = "admin@example.org"
    earliest_datestamp: str = "1970-01-01"
    protocol_version: str = "2.0"


@dataclass(frozen=True)
class RecordHeader:
    """Identity, modification datestamp and deletion state of one record."""

    identifier: str
    datestamp: str
    deleted: bool = False

    def __post_init__(self):
        if not self.identifier:
            raise InvariantViolation("record identifier must be non-empty")
        if not validate_w3cdtf(self.datestamp):
            raise InvariantViolation(
                f"record datestamp {self.datestamp!r} is not a valid datestamp")


class RecordSource(Protocol):
    """What the provider serves: an immutable view of records."""

    @property
    def identity(self) -> ProviderIdentity: ...

    @property
    def snapshot_id(self) -> str: ...

    def headers(self) -> Sequence[RecordHeader]: ...

    def get(self, identifier: str) -> Optional[tuple[RecordHeader, Optional[OlacRecord]]]: ...


class InMemorySource:
    """Record source backed by a dict; the building block for test archives."""

    def __init__(self, identity: ProviderIdentity,
                 entries: Iterable[tuple[RecordHeader, Optional[OlacRecord]]] = ()):
        self._identity = identity
        self._entries: dict[str, tuple[RecordHeader, Optional[OlacRecord]]] = {}
        self._mutations = 0
        for header, record in entries:
            self.put(header, record)

    @property
    def identity(self) -> ProviderIdentity:
        return self._identity

    @property
    def snapshot_id(self) -> str:
        return str(self._mutations)

    def put(self, header: RecordHeader, record: Optional[OlacRecord]) -> None:
        if header.deleted and record is not None:
            raise InvariantViolation("deleted records carry no body")
        self._entries[header.identifier] = (header, record)
        self._mutations += 1

    def delete(self, identifier: str, datestamp: str) -> None:
        self.put(RecordHeader(identifier, datestamp, deleted=True), None)

    def headers(self) -> list[RecordHeader]:
        return sorted((h for h, _ in self._entries.values()),
                      key=lambda h: (h.datestamp, h.identifier))

    def get(self, identifier: str):
        return self._entries.get(identifier)

    def __len__(self) -> int:
        return len(self._entries)


# ---------------------------------------------------------------------------
# Resumption tokens


class _BadToken(Exception):
    pass


def _sign(secret: bytes, payload: bytes) -> str:
    return hmac.new(secret, payload, hashlib.sha256).hexdigest()[:32]


def make_token(secret: bytes, fields: dict) -> str:
    payload = json.dumps(fields, sort_keys=True, separators=(",", ":")).encode("ascii")
    body = base64.urlsafe_b64encode(payload).decode("ascii").rstrip("=")
    return f"{body}.{_sign(secret, payload)}"


def read_token(secret: bytes, token: str) -> dict:
    try:
        body, signature = token.rsplit(".", 1)
        payload = base64.urlsafe_b64decode(body + "=" * (-len(body) % 4))
    except (ValueError, TypeError):
        raise _BadToken("token is not decodable") from None
    if not hmac.compare_digest(_sign(secret, payload), signature):
        raise _BadToken("token signature mismatch")
    try:
        fields = json.loads(payload)
    except ValueError:
        raise _BadToken("token payload is not readable") from None
    if not isinstance(fields, dict):
        raise _BadToken("token payload is not a mapping")
    return fields


# ---------------------------------------------------------------------------
# Provider


def _default_clock() -> datetime:
    return datetime.now(timezone.utc)


class DataProvider:
    """Maps one protocol request to one XML response.

    `source` is either a record source or a zero-argument callable returning
    the current one (so a live catalog can advance between requests while
    each request still sees a single snapshot).
    """

    def __init__(
        self,
        source: Union[RecordSource, Callable[[], RecordSource]],
        *,
        page_size: int = 500,
        token_ttl: int = 600,
        granularity: str = "day",
        clock: Optional[Callable[[], datetime]] = None,
        secret: Optional[bytes] = None,
        registry: Optional[VocabularyRegistry] = None,
    ):
        if granularity not in ("day", "second"):
            raise ValueError(f"granularity must be 'day' or 'second', got {granularity!r}")
        self._source = source
        self.page_size = page_size
        self.token_ttl = token_ttl
        self.granularity = granularity
        self._clock = clock or _default_clock
        self._secret = secret if secret is not None else os.urandom(16)
        self._registry = registry or default_registry()

    # -- helpers -----------------------------------------------------------

    def _current_source(self) -> RecordSource:
        return self._source() if callable(self._source) else self._source

    def _now_string(self) -> str:
        return self._clock().astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    def _normalize_datestamp(self, datestamp: str) -> str:
        if self.granularity == "day":
            return datestamp[:10]
        if _DAY.match(datestamp):
            return f"{datestamp}T00:00:00Z"
        return datestamp

    def _valid_window_arg(self, value: str) -> bool:
        if _DAY.match(value):
            return validate_w3cdtf(value)
        if self.granularity == "second" and _SECOND.match(value):
            return validate_w3cdtf(value)
        return False

    def _in_window(self, datestamp: str, from_: Optional[str], until: Optional[str]) -> bool:
        day = datestamp[:10]
        if from_ is not None and day < from_[:10]:
            return False
        if until is not None and day > until[:10]:
            return False
        if self.granularity == "second":
            value = self._normalize_datestamp(datestamp)
            if from_ is not None and len(from_) > 10 and value < from_:
                return False
            if until is not None and len(until) > 10 and value > until:
                return False
        return True

    # -- rendering ---------------------------------------------------------

    def _envelope(self, verb: Optional[str], args: dict[str, str],
                  body_lines: list[str], echo_args: bool) -> bytes:
        source = self._current_source()
        request_attrs = ""
        if echo_args and verb is not None:
            parts = [f' verb={quoteattr(verb)}']
            for key in _ARG_ORDER:
                if key in args:
                    parts.append(f" {key}={quoteattr(args[key])}")
            request_attrs = "".join(parts)
        lines = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f"<OAI-PMH xmlns={quoteattr(OAI_NS)}"
            f" xmlns:xsi={quoteattr(XSI_NS)}"
            f" xsi:schemaLocation={quoteattr(OAI_SCHEMA_LOCATION)}>",
            f"  <responseDate>{self._now_string()}</responseDate>",
            f"  <request{request_attrs}>{escape(source.identity.base_url)}</request>",
        ]
        lines.extend(body_lines)
        lines.append("</OAI-PMH>")
        return ("\n".join(lines) + "\n").encode("utf-8")

    def _error(self, verb: Optional[str], args: dict[str, str],
               code: str, message: str) -> bytes:
        assert code in ERROR_CODES
        body = [f"  <error code={quoteattr(code)}>{escape(message)}</error>"]
        return self._envelope(verb, args, body, echo_args=False)

    def _header_lines(self, header: RecordHeader, depth: int) -> list[str]:
        pad = "  " * depth
        status = ' status="deleted"' if header.deleted else ""
        return [
            f"{pad}<header{status}>",
            f"{pad}  <identifier>{escape(header.identifier)}</identifier>",
            f"{pad}  <datestamp>{escape(self._normalize_datestamp(header.datestamp))}</datestamp>",
            f"{pad}</header>",
        ]

    def _metadata_lines(self, record: OlacRecord, prefix: str, depth: int) -> list[str]:
        pad = "  " * depth
        if prefix == "olac":
            body = record_lines(record, depth=depth + 1)
        else:
            body = dc_lines(to_simple_dc(record, self._registry), depth=depth + 1)
        return [f"{pad}<metadata>"] + body + [f"{pad}</metadata>"]

    def _record_lines(self, header: RecordHeader, record: Optional[OlacRecord],
                      prefix: str, depth: int) -> list[str]:
        pad = "  " * depth
        lines = [f"{pad}<record>"]
        lines.extend(self._header_lines(header, depth + 1))
        if record is not None and not header.deleted:
            lines.extend(self._metadata_lines(record, prefix, depth + 1))
        lines.append(f"{pad}</record>")
        return lines

    # -- request handling ----------------------------------------------------

    def handle_request(self, params) -> bytes:
        """Serve one request; `params` maps names to values or value lists."""
        args: dict[str, str] = {}
        for key, value in dict(params).items():
            if isinstance(value, (list, tuple)):
                if len(value) != 1:
                    return self._error(None, {}, "badArgument",
                                       f"parameter {key!r} repeated")
                value = value[0]
            args[str(key)] = str(value)
        verb = args.pop("verb", None)
        if verb is None or verb not in VERBS:
            return self._error(None, {}, "badVerb", f"unknown verb {verb!r}")
        allowed = _VERB_ARGS[verb]
        illegal = sorted(set(args) - allowed)
        if illegal:
            return self._error(verb, args, "badArgument",
                               f"illegal parameters for {verb}: {illegal}")
        if "set" in args:
            return self._error(verb, args, "badArgument",
                               "this repository has no set hierarchy")
        handler = getattr(self, f"_verb_{verb}")
        return handler(args)

    # -- verbs ---------------------------------------------------------------

    def _verb_Identify(self, args: dict[str, str]) -> bytes:
        source = self._current_source()
        identity = source.identity
        headers = source.headers()
        earliest = identity.earliest_datestamp
        if headers:
            earliest = min(self._normalize_datestamp(h.datestamp) for h in headers)
        granularity = "YYYY-MM-DD" if self.granularity == "day" else "YYYY-MM-DDThh:mm:ssZ"
        body = [
            "  <Identify>",
            f"    <repositoryName>{escape(identity.repository_name)}</repositoryName>",
            f"    <baseURL>{escape(identity.base_url)}</baseURL>",
            f"    <protocolVersion>{escape(identity.protocol_version)}</protocolVersion>",
            f"    <adminEmail>{escape(identity.admin_email)}</adminEmail>",
            f"    <earliestDatestamp>{escape(self._normalize_datestamp(earliest))}</earliestDatestamp>",
            "    <deletedRecord>persistent</deletedRecord>",
            f"    <granularity>{granularity}</granularity>",
            "  </Identify>",
        ]
        return self._envelope("Identify", args, body, echo_args=True)

    def _verb_ListMetadataFormats(self, args: dict[str, str]) -> bytes:
        source = self._current_source()
        if "identifier" in args and source.get(args["identifier"]) is None:
            return self._error("ListMetadataFormats", args, "idDoesNotExist",
                               f"no record with identifier {args['identifier']!r}")
        body = ["  <ListMetadataFormats>"]
        for prefix in sorted(METADATA_FORMATS):
            schema, namespace = METADATA_FORMATS[prefix]
            body.extend([
                "    <metadataFormat>",
                f"      <metadataPrefix>{prefix}</metadataPrefix>",
                f"      <schema>{escape(schema)}</schema>",
                f"      <metadataNamespace>{escape(namespace)}</metadataNamespace>",
                "    </metadataFormat>",
            ])
        body.append("  </ListMetadataFormats>")
        return self._envelope("ListMetadataFormats", args, body, echo_args=True)

    def _verb_ListSets(self, args: dict[str, str]) -> bytes:
        if "resumptionToken" in args:
            return self._error("ListSets", args, "badResumptionToken",
                               "set listings are never paginated here")
        return self._envelope("ListSets", args, ["  <ListSets/>"], echo_args=True)

    def _list_request(self, verb: str, args: dict[str, str], with_records: bool) -> bytes:
        source = self._current_source()
        if "resumptionToken" in args:
            if len(args) > 1:
                return self._error(verb, args, "badArgument",
                                   "resumptionToken is an exclusive parameter")
            try:
                fields = read_token(self._secret, args["resumptionToken"])
            except _BadToken as exc:
                return self._error(verb, args, "badResumptionToken", str(exc))
            if fields.get("v") != verb:
                return self._error(verb, args, "badResumptionToken",
                                   "token was issued for a different request")
            if fields.get("snap") != source.snapshot_id:
                return self._error(verb, args, "badResumptionToken",
                                   "the record source changed; restart the harvest")
            if int(fields.get("exp", 0)) < int(self._clock().timestamp()):
                return self._error(verb, args, "badResumptionToken", "token expired")
            prefix = fields.get("p", "")
            from_, until = fields.get("f") or None, fields.get("u") or None
            position = int(fields.get("pos", 0))
        else:
            if "metadataPrefix" not in args:
                return self._error(verb, args, "badArgument", "metadataPrefix is required")
            prefix = args["metadataPrefix"]
            from_, until = args.get("from"), args.get("until")
            for name, value in (("from", from_), ("until", until)):
                if value is not None and not self._valid_window_arg(value):
                    return self._error(verb, args, "badArgument",
                                       f"{name} is not a valid datestamp: {value!r}")
            if from_ is not None and until is not None:
                if len(from_) != len(until):
                    return self._error(verb, args, "badArgument",
                                       "from and until have different granularity")
                if from_ > until:
                    return self._error(verb, args, "badArgument", "from is after until")
            position = 0
        if prefix not in METADATA_FORMATS:
            return self._error(verb, args, "cannotDisseminateFormat",
                               f"unsupported metadata format {prefix!r}")
        matches = [h for h in source.headers() if self._in_window(h.datestamp, from_, until)]
        if not matches:
            return self._error(verb, args, "noRecordsMatch", "no records in the window")
        if position >= len(matches) or position < 0:
            return self._error(verb, args, "badResumptionToken", "cursor out of range")
        page = matches[position:position + self.page_size]
        body = [f"  <{verb}>"]
        for header in page:
            if with_records:
                record = None
                if not header.deleted:
                    found = source.get(header.identifier)
                    record = found[1] if found else None
                body.extend(self._record_lines(header, record, prefix, depth=2))
            else:
                body.extend(self._header_lines(header, depth=2))
        sliced = position + len(page) < len(matches)
        if sliced:
            token = make_token(self._secret, {
                "v": verb, "p": prefix, "f": from_ or "", "u": until or "",
                "pos": position + len(page), "snap": source.snapshot_id,
                "exp": int(self._clock().timestamp()) + self.token_ttl,
            })
            body.append(
                f'    <resumptionToken completeListSize="{len(matches)}"'
                f' cursor="{position}">{token}</resumptionToken>')
        elif position > 0:
            body.append(
                f'    <resumptionToken completeListSize="{len(matches)}"'
                f' cursor="{position}"/>')
        body.append(f"  </{verb}>")
        return self._envelope(verb, args, body, echo_args=True)

    def _verb_ListIdentifiers(self, args: dict[str, str]) -> bytes:
        return self._list_request("ListIdentifiers", args, with_records=False)

    def _verb_ListRecords(self, args: dict[str, str]) -> bytes:
        return self._list_request("ListRecords", args, with_records=True)

    def _verb_GetRecord(self, args: dict[str, str]) -> bytes:
        missing = sorted({"identifier", "metadataPrefix"} - set(args))
        if missing:
            return self._error("GetRecord", args, "badArgument",
                               f"missing parameters: {missing}")
        prefix = args["metadataPrefix"]
        if prefix not in METADATA_FORMATS:
            return self._error("GetRecord", args, "cannotDisseminateFormat",
                               f"unsupported metadata format {prefix!r}")
        source = self._current_source()
        found = source.get(args["identifier"])
        if found is None:
            return self._error("GetRecord", args, "idDoesNotExist",
                               f"no record with identifier {args['identifier']!r}")
        header, record = found
        body = ["  <GetRecord>"]
        body.extend(self._record_lines(header, record, prefix, depth=2))
        body.append("  </GetRecord>")
        return self._envelope("GetRecord", args, body, echo_args=True)
