"""HTTP service: harvesting endpoint, JSON search API, and static UI.

Routes:

* ``/oai`` — the data-provider endpoint re-exposing the union catalog
  (GET and form-encoded POST);
* ``/api/search`` — query parameters mirror the Query fields, plus
  ``offset``/``limit`` paging;
* ``/api/facets/<id>`` — facet values with labels and counts;
* ``/api/record/<archive>/<id>`` — display form plus a raw-XML link;
* everything else — static files from the configured UI directory.

Responses from ``/api`` are JSON and snapshot-tagged so clients can detect
that two responses came from different catalog states.  The search index is
rebuilt off the request path whenever the catalog version moves and swapped
in atomically; requests always use one immutable index.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, quote, unquote, urlparse

from olacat.catalog import Catalog
from olacat.crosswalk import display_to_html, render_display
from olacat.oai.provider import DataProvider, ProviderIdentity
from olacat.search import (
    EmptyQuery,
    Query,
    UnknownFacet,
    build_index,
    execute,
    facets_to_json,
    result_to_json,
)
from olacat.vocab import VocabularyRegistry, default_registry

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><title>Union catalog</title></head>
<body><h1>Union catalog</h1>
<p>No UI assets are installed. The JSON API lives under /api and the
harvesting endpoint under /oai.</p></body></html>
"""

_QUERY_FIELDS = ("free_text", "subject_language", "language", "linguistic_type",
                 "discourse_type", "linguistic_field", "role", "name",
                 "archive", "dc_type")


class ServiceState:
    """Shared state behind the request handlers."""

    def __init__(self, catalog: Catalog, identity: ProviderIdentity, *,
                 registry: Optional[VocabularyRegistry] = None,
                 page_size: int = 500, static_dir: Optional[Path] = None,
                 clock=None, secret: Optional[bytes] = None):
        self.catalog = catalog
        self.registry = registry or default_registry()
        self.identity = identity
        self.static_dir = Path(static_dir) if static_dir else None
        self.provider = DataProvider(
            lambda: catalog.provider_source(identity),
            page_size=page_size, clock=clock, secret=secret, registry=self.registry)
        self._index = None
        self._index_lock = threading.Lock()

    def index(self):
        snapshot = self.catalog.snapshot()
        with self._index_lock:
            if self._index is None or self._index.snapshot_id != snapshot.version:
                self._index = build_index(snapshot, self.registry)
            return self._index

    def refresh_index(self) -> None:
        self.index()


class _Handler(BaseHTTPRequestHandler):
    server_version = "olacat"
    state: ServiceState  # set by build_server on the subclass

    # -- plumbing ------------------------------------------------------------

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _send(self, status: int, content_type: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self._send(status, "application/json; charset=utf-8", body)

    # -- routing -------------------------------------------------------------

    def do_GET(self):
        parsed = urlparse(self.path)
        path = unquote(parsed.path)
        if path == "/oai":
            params = parse_qs(parsed.query, keep_blank_values=True)
            body = self.state.provider.handle_request(params)
            self._send(200, "text/xml; charset=utf-8", body)
        elif path == "/api/search":
            self._api_search(parse_qs(parsed.query, keep_blank_values=True))
        elif path.startswith("/api/facets/"):
            self._api_facets(path[len("/api/facets/"):])
        elif path.startswith("/api/record/"):
            self._api_record(path[len("/api/record/"):])
        elif path.startswith("/api"):
            self._send_json(404, {"error": f"no such endpoint: {path}"})
        else:
            self._static(path)

    def do_POST(self):
        parsed = urlparse(self.path)
        if unquote(parsed.path) != "/oai":
            self._send_json(404, {"error": "POST is only supported on /oai"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length).decode("utf-8") if length else ""
        params = parse_qs(body, keep_blank_values=True)
        for key, values in parse_qs(parsed.query, keep_blank_values=True).items():
            params.setdefault(key, values)
        self._send(200, "text/xml; charset=utf-8", self.state.provider.handle_request(params))

    # -- API -----------------------------------------------------------------

    def _api_search(self, params: dict[str, list[str]]) -> None:
        kwargs = {}
        for field in _QUERY_FIELDS:
            values = params.get(field)
            if values and values[0] != "":
                kwargs[field] = values[0]
        try:
            offset = max(0, int(params.get("offset", ["0"])[0]))
            limit = params.get("limit")
            limit_value = int(limit[0]) if limit else None
        except ValueError:
            self._send_json(400, {"error": "offset and limit must be integers"})
            return
        try:
            result = execute(self.state.index(), Query(**kwargs), self.state.registry)
        except EmptyQuery as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send_json(200, result_to_json(result, offset=offset, limit=limit_value))

    def _api_facets(self, facet_id: str) -> None:
        try:
            payload = facets_to_json(self.state.index(), facet_id, self.state.registry)
        except UnknownFacet as exc:
            self._send_json(404, {"error": str(exc)})
            return
        self._send_json(200, payload)

    def _api_record(self, rest: str) -> None:
        parts = rest.split("/", 1)
        if len(parts) != 2 or not parts[0] or not parts[1]:
            self._send_json(400, {"error": "expected /api/record/<archive>/<id>"})
            return
        archive, identifier = parts
        entry = self.state.catalog.get(archive, identifier)
        if entry is None:
            self._send_json(404, {"error": f"no record {archive}/{identifier}"})
            return
        if entry.deleted:
            self._send_json(404, {"error": f"record {archive}/{identifier} is deleted",
                                  "deleted": True})
            return
        display = render_display(entry.record, self.state.registry)
        xml_link = ("/oai?verb=GetRecord&metadataPrefix=olac&identifier="
                    + quote(f"{archive}:{identifier}", safe=""))
        self._send_json(200, {
            "snapshot": self.state.catalog.snapshot().version,
            "archive": archive,
            "id": identifier,
            "datestamp": entry.header.datestamp,
            "display": [{"label": line.label, "text": line.text} for line in display],
            "html": display_to_html(display),
            "xml": xml_link,
        })

    # -- static UI -------------------------------------------------------------

    def _static(self, path: str) -> None:
        if path in ("", "/"):
            path = "/index.html"
        root = self.state.static_dir
        if root is None or not root.is_dir():
            if path == "/index.html":
                self._send(200, "text/html; charset=utf-8", _FALLBACK_PAGE)
            else:
                self._send(404, "text/plain; charset=utf-8", b"not found\n")
            return
        target = (root / path.lstrip("/")).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            if path == "/index.html":
                self._send(200, "text/html; charset=utf-8", _FALLBACK_PAGE)
            else:
                self._send(404, "text/plain; charset=utf-8", b"not found\n")
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        if content_type.startswith("text/") or content_type == "application/javascript":
            content_type += "; charset=utf-8"
        self._send(200, content_type, target.read_bytes())


def build_server(state: ServiceState, port: int, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    """Bind the service; raises OSError if the port is taken."""
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server
