"""Operator command line: validate, harvest, serve, search, export.

Exit codes are uniform across subcommands: 0 for success, 1 for a domain
failure (nonconformant records, a failed archive, empty search), 2 for
usage or environment problems (bad flags, unreadable files, unknown
archive, port in use).  Configuration comes from a JSON file (flags win
over file values); the only environment variable honored is
``OLACAT_CONFIG`` for the config path.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from olacat import catalog as catalog_mod
from olacat import search as search_mod
from olacat import validate as validate_mod
from olacat import vocab as vocab_mod
from olacat import xmlio
from olacat.oai.provider import ProviderIdentity
from olacat.record import RefinementTable, set_default_refinements
from olacat.server import ServiceState, build_server

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

_CONFIG_KEYS = {
    "catalog_dir", "providers_file", "refinements_file", "vocab_files",
    "language_codes_file", "alias_file", "equivalence_file",
    "extension_vocab_files", "port", "page_size", "harvest_interval",
    "repository_name", "base_url", "admin_email",
}


class ConfigError(Exception):
    pass


@dataclass
class Config:
    """Validated runtime configuration; bad values abort before side effects."""

    catalog_dir: Path = Path("catalog")
    providers_file: Optional[Path] = None
    refinements_file: Optional[Path] = None
    vocab_files: list[Path] = field(default_factory=list)
    language_codes_file: Optional[Path] = None
    alias_file: Optional[Path] = None
    equivalence_file: Optional[Path] = None
    extension_vocab_files: list[Path] = field(default_factory=list)
    port: int = 8080
    page_size: int = 500
    harvest_interval: float = 0.0
    repository_name: str = "Union Catalog"
    base_url: Optional[str] = None
    admin_email: str = "admin@example.org"

    @classmethod
    def load(cls, path: Optional[str]) -> "Config":
        config = cls()
        if path is None:
            path = os.environ.get("OLACAT_CONFIG")
        if path is None:
            return config
        source = Path(path)
        if not source.is_file():
            raise ConfigError(f"config file not found: {source}")
        try:
            raw = json.loads(source.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(raw) - _CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        base = source.parent

        def _path(value: str) -> Path:
            candidate = Path(value)
            return candidate if candidate.is_absolute() else base / candidate

        for key, value in raw.items():
            if key in ("vocab_files", "extension_vocab_files"):
                if not isinstance(value, list):
                    raise ConfigError(f"{key} must be a list of paths")
                setattr(config, key, [_path(v) for v in value])
            elif key in ("catalog_dir", "providers_file", "refinements_file",
                         "language_codes_file", "alias_file", "equivalence_file"):
                setattr(config, key, _path(value))
            elif key in ("port", "page_size"):
                setattr(config, key, int(value))
            elif key == "harvest_interval":
                config.harvest_interval = float(value)
            else:
                setattr(config, key, value)
        config.validate()
        return config

    def validate(self) -> None:
        if self.port < 0 or self.port > 65535:
            raise ConfigError(f"port out of range: {self.port}")
        if self.page_size < 1:
            raise ConfigError(f"page size must be positive: {self.page_size}")
        if self.harvest_interval < 0:
            raise ConfigError("harvest interval must not be negative")
        for path in [self.providers_file, self.refinements_file,
                     self.language_codes_file, self.alias_file,
                     self.equivalence_file, *self.vocab_files,
                     *self.extension_vocab_files]:
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"configured file not found: {path}")

    def registry(self) -> vocab_mod.VocabularyRegistry:
        custom = [self.vocab_files, self.language_codes_file,
                  self.alias_file, self.equivalence_file]
        if self.refinements_file is not None:
            set_default_refinements(RefinementTable.from_file(self.refinements_file))
        if not self.vocab_files and all(v is None for v in custom[1:]):
            registry = vocab_mod.default_registry()
            for path in self.extension_vocab_files:
                registry.register_extension(path)
            return registry
        if not self.vocab_files or None in custom[1:]:
            raise ConfigError(
                "custom vocabularies need vocab_files, language_codes_file, "
                "alias_file and equivalence_file together")
        return vocab_mod.build_registry(
            self.vocab_files, self.language_codes_file, self.alias_file,
            self.equivalence_file, self.extension_vocab_files)

    def identity(self) -> ProviderIdentity:
        base_url = self.base_url or f"http://localhost:{self.port}/oai"
        return ProviderIdentity(repository_name=self.repository_name,
                                base_url=base_url, admin_email=self.admin_email)


def _open_catalog(config: Config) -> catalog_mod.Catalog:
    catalog = catalog_mod.Catalog(config.catalog_dir, registry=config.registry())
    if config.providers_file is not None:
        catalog.register_from_file(config.providers_file)
    return catalog


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args: argparse.Namespace, config: Config) -> int:
    registry = config.registry()
    summary = validate_mod.BatchSummary()
    fatal = False
    for path in args.paths:
        source = Path(path)
        try:
            data = source.read_bytes()
        except OSError as exc:
            print(f"{path}: unreadable: {exc}", file=sys.stderr)
            fatal = True
            continue
        root = xmlio.sniff_root(data)
        try:
            if root == (xmlio.OLAC_NS, "catalog"):
                entries, diagnostics = xmlio.read_stream(data)
                records = [(f"{path}#{e.archive}:{e.identifier}", e.record)
                           for e in entries if e.record is not None and not e.deleted]
            else:
                record, diagnostics = xmlio.parse_record(data)
                records = [(str(path), record)]
        except xmlio.FatalParseError as exc:
            print(f"{path}: fatal: {exc}", file=sys.stderr)
            fatal = True
            continue
        summary.add_diagnostics(diagnostics)
        for diagnostic in diagnostics:
            if args.json:
                print(diagnostic.machine_line())
            else:
                print(f"{path}: {diagnostic.severity} [{diagnostic.rule}] "
                      f"{diagnostic.location}: {diagnostic.message}")
        for record_id, record in records:
            report = validate_mod.validate(record, registry, record_id=record_id)
            summary.add(report)
            if args.json:
                for line in report.machine_lines():
                    print(line)
            elif report.diagnostics:
                print(report.to_text())
    if not args.json:
        print(summary.to_text())
    if fatal:
        return EXIT_USAGE
    if summary.errors or summary.nonconformant:
        return EXIT_DOMAIN
    if args.strict and summary.warnings:
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_harvest(args: argparse.Namespace, config: Config) -> int:
    with _open_catalog(config) as catalog:
        if args.archive == "all":
            archives = [source.id for source in catalog.sources()]
        else:
            try:
                archives = [catalog.source(args.archive).id]
            except catalog_mod.UnknownArchive as exc:
                print(str(exc), file=sys.stderr)
                return EXIT_USAGE
        reports = []
        for archive_id in archives:
            try:
                if args.incremental:
                    report = catalog.harvest_incremental(archive_id)
                else:
                    report = catalog.harvest_full(archive_id)
            except catalog_mod.HarvestStateError as exc:
                report = catalog_mod.HarvestReport(archive=archive_id,
                                                   errors=[str(exc)])
            reports.append(report)
        if args.json:
            print(json.dumps([{
                "archive": r.archive, "added": r.added, "updated": r.updated,
                "deleted": r.deleted, "errors": r.errors} for r in reports]))
        else:
            for report in reports:
                print(report.to_text())
        return EXIT_OK if all(r.ok for r in reports) else EXIT_DOMAIN


def cmd_serve(args: argparse.Namespace, config: Config) -> int:
    port = args.port if args.port is not None else config.port
    registry = config.registry()
    with _open_catalog(config) as catalog:
        state = ServiceState(catalog, config.identity(), registry=registry,
                             page_size=config.page_size, static_dir=args.ui_dir)
        try:
            server = build_server(state, port, host=args.host)
        except OSError as exc:
            print(f"cannot bind port {port}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        stop = threading.Event()

        def _shutdown(signum, frame):
            stop.set()
            threading.Thread(target=server.shutdown, daemon=True).start()

        signal.signal(signal.SIGTERM, _shutdown)
        signal.signal(signal.SIGINT, _shutdown)
        if config.harvest_interval > 0:
            def _scheduler():
                while not stop.wait(config.harvest_interval):
                    for source in catalog.sources():
                        try:
                            if source.last_harvest is None:
                                catalog.harvest_full(source.id)
                            else:
                                catalog.harvest_incremental(source.id)
                        except catalog_mod.CatalogError:
                            pass
                    state.refresh_index()
            threading.Thread(target=_scheduler, daemon=True).start()
        state.refresh_index()
        bound_port = server.server_address[1]
        print(f"serving on http://{args.host}:{bound_port}/ "
              f"(protocol endpoint at /oai)", file=sys.stderr, flush=True)
        server.serve_forever()
        server.server_close()
    return EXIT_OK


def cmd_search(args: argparse.Namespace, config: Config) -> int:
    query = search_mod.Query(
        free_text=args.text, subject_language=args.subject_language,
        language=args.language, linguistic_type=args.linguistic_type,
        discourse_type=args.discourse_type, linguistic_field=args.linguistic_field,
        role=args.role, name=args.name, archive=args.archive, dc_type=args.dc_type)
    if query.is_empty:
        print("search needs at least one criterion "
              "(see olacat search --help)", file=sys.stderr)
        return EXIT_USAGE
    registry = config.registry()
    with _open_catalog(config) as catalog:
        index = search_mod.build_index(catalog.snapshot(), registry)
        result = search_mod.execute(index, query, registry)
        payload = search_mod.result_to_json(result, offset=args.offset,
                                            limit=args.limit)
    if args.json:
        print(json.dumps(payload, ensure_ascii=False))
    else:
        print(f"{payload['total']} match(es), snapshot {payload['snapshot']}")
        for item in payload["items"]:
            extras = "; ".join(x for x in (item["language"], item["type"]) if x)
            line = f"  {item['archive']}:{item['id']}  {item['title'] or '(untitled)'}"
            if extras:
                line += f"  [{extras}]"
            print(line)
    return EXIT_OK


def cmd_export(args: argparse.Namespace, config: Config) -> int:
    with _open_catalog(config) as catalog:
        data = catalog.export_bytes(args.format)
    if args.output is None:
        sys.stdout.buffer.write(data)
    else:
        Path(args.output).write_bytes(data)
    return EXIT_OK


def cmd_register(args: argparse.Namespace, config: Config) -> int:
    with _open_catalog(config) as catalog:
        try:
            source = catalog.register_archive(args.id, args.url)
        except catalog_mod.DuplicateArchiveId as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_DOMAIN
        except catalog_mod.CatalogError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_USAGE
        print(f"registered {source.id} -> {source.base_url}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="olacat",
        description="Language-archive metadata toolkit: validate records, "
                    "harvest archives, serve and search the union catalog.")
    parser.add_argument("--config", help="path to the JSON config file "
                                         "(or set OLACAT_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="conformance-check record files")
    p.add_argument("paths", nargs="+", help="record or stream files")
    p.add_argument("--strict", action="store_true",
                   help="treat warnings as failures")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("harvest", help="harvest registered archives")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--full", action="store_true", help="harvest everything")
    mode.add_argument("--incremental", action="store_true",
                      help="harvest changes since the last successful run")
    p.add_argument("--archive", default="all", help="archive id or 'all'")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("serve", help="run the endpoint, API and UI")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", default=None, help="directory of built UI assets")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("search", help="query the union catalog")
    p.add_argument("--text", help="free-text terms")
    p.add_argument("--subject-language", dest="subject_language",
                   help="code or language name")
    p.add_argument("--language", help="code or language name")
    p.add_argument("--linguistic-type", dest="linguistic_type")
    p.add_argument("--discourse-type", dest="discourse_type")
    p.add_argument("--linguistic-field", dest="linguistic_field")
    p.add_argument("--role")
    p.add_argument("--name", help="creator/contributor name")
    p.add_argument("--archive")
    p.add_argument("--dc-type", dest="dc_type")
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("export", help="dump the catalog as a record stream")
    p.add_argument("--format", choices=("olac", "oai_dc"), default="olac")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("register", help="register a data provider")
    p.add_argument("id", help="short archive slug")
    p.add_argument("url", help="provider base URL")
    p.set_defaults(func=cmd_register)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        config = Config.load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "harvest" and not args.full and not args.incremental:
        args.full = True
    try:
        return args.func(args, config)
    except KeyboardInterrupt:
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
