"""Persistent union catalog built by harvesting many archives.

Every harvested record is stored under its (archive id, record identifier)
key; the same resource listed by two archives is two entries — the catalog
unions, it does not merge.  Deletions are kept as tombstones so incremental
harvests converge to the same state a fresh full harvest would produce.

Persistence is an append-only journal plus periodic snapshots, both kept in
the record stream body format with one small header line per entry:

    #olac <op> <archive> <quoted-id> <datestamp> <first-seen> <last-updated> <nbytes>
    <nbytes of record XML for upserts>

A torn tail (the process died mid-write) is detected on reload and cut off;
everything before it replays to a consistent catalog.  Mutations go through
a single writer lock; readers work on immutable snapshots identified by a
version string that changes with every committed mutation.
"""

from __future__ import annotations

import io
import os
import re
import threading
import urllib.parse
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

from olacat.crosswalk import to_simple_dc
from olacat.oai.harvester import (
    HarvestWindow,
    ProtocolError,
    ProviderUnreachable,
    Transport,
    harvest as run_harvest,
)
from olacat.oai.provider import ProviderIdentity, RecordHeader
from olacat.record import OlacRecord
from olacat.vocab import VocabularyRegistry, default_registry
from olacat.xmlio import FatalParseError, StreamEntry, parse_record, serialize_record, write_stream

_SLUG = re.compile(r"^[a-z0-9][a-z0-9_-]*$")
_JOURNAL_MAGIC = "#olac"

FAILING_AFTER = 3  # consecutive failures before a source is marked failing


class CatalogError(Exception):
    """Base class for catalog failures."""


class DuplicateArchiveId(CatalogError):
    pass


class UnknownArchive(CatalogError):
    pass


class HarvestStateError(CatalogError):
    """An incremental harvest was requested without prior history."""


@dataclass
class ArchiveSource:
    """One registered data provider and its harvest bookkeeping."""

    id: str
    base_url: str
    last_harvest: Optional[str] = None
    status: str = "active"
    failures: int = 0


@dataclass(frozen=True)
class CatalogEntry:
    """One record in the union catalog, keyed by provenance."""

    archive: str
    identifier: str
    header: RecordHeader
    record: Optional[OlacRecord]
    first_seen: str
    last_updated: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.archive, self.identifier)

    @property
    def deleted(self) -> bool:
        return self.header.deleted


@dataclass
class HarvestReport:
    """Outcome of harvesting one archive."""

    archive: str
    added: int = 0
    updated: int = 0
    deleted: int = 0
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_text(self) -> str:
        state = "ok" if self.ok else "FAILED"
        line = (f"{self.archive}: {state} added={self.added} "
                f"updated={self.updated} deleted={self.deleted}")
        for error in self.errors:
            line += f"\n  error: {error}"
        return line


@dataclass(frozen=True)
class CatalogSnapshot:
    """Immutable view of the catalog for readers (search, provider)."""

    version: str
    entries: dict[tuple[str, str], CatalogEntry]

    def live_entries(self) -> list[CatalogEntry]:
        return [e for e in self.entries.values() if not e.deleted]


def _default_clock() -> datetime:
    return datetime.now(timezone.utc)


def _quote(text: str) -> str:
    return urllib.parse.quote(text, safe="")


def _unquote(text: str) -> str:
    return urllib.parse.unquote(text)


class Catalog:
    """The union catalog: registered sources, entries, journal, snapshots.

    Layout inside the catalog directory:

    * ``sources.tsv`` — registered archives and their harvest state;
    * ``journal.olacx`` — append-only upserts/deletes since the last snapshot;
    * ``snapshot-<n>.olacx`` — the most recent full dump (older ones removed).
    """

    def __init__(self, directory: str | Path, *,
                 clock: Optional[Callable[[], datetime]] = None,
                 registry: Optional[VocabularyRegistry] = None):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._clock = clock or _default_clock
        self._registry = registry or default_registry()
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str], CatalogEntry] = {}
        self._sources: dict[str, ArchiveSource] = {}
        self._snapshot_base = 0
        self._applied = 0
        self._journal_file = None
        self._snapshot_cache: Optional[CatalogSnapshot] = None
        self._load()

    # -- paths ---------------------------------------------------------------

    @property
    def _sources_path(self) -> Path:
        return self.directory / "sources.tsv"

    @property
    def _journal_path(self) -> Path:
        return self.directory / "journal.olacx"

    def _snapshot_path(self, snapshot_id: int) -> Path:
        return self.directory / f"snapshot-{snapshot_id}.olacx"

    # -- loading ---------------------------------------------------------------

    def _load(self) -> None:
        self._load_sources()
        snapshots = sorted(
            (int(m.group(1)), p)
            for p in self.directory.glob("snapshot-*.olacx")
            if (m := re.match(r"snapshot-(\d+)\.olacx$", p.name))
        )
        if snapshots:
            self._snapshot_base, newest = snapshots[-1]
            self._replay(newest.read_bytes(), repair=False)
        self._applied = 0
        if self._journal_path.exists():
            good = self._replay(self._journal_path.read_bytes(), repair=True)
            if good is not None:
                with open(self._journal_path, "r+b") as handle:
                    handle.truncate(good)
        self._journal_file = open(self._journal_path, "ab")

    def _replay(self, data: bytes, repair: bool) -> Optional[int]:
        """Apply journal-format entries; returns the good byte length when
        repairing a torn tail, None when the whole input applied cleanly."""
        offset = 0
        length = len(data)
        while offset < length:
            newline = data.find(b"\n", offset)
            if newline == -1:
                return offset if repair else None
            line = data[offset:newline].decode("utf-8", errors="replace")
            parts = line.split(" ")
            if len(parts) != 8 or parts[0] != _JOURNAL_MAGIC or \
                    parts[1] not in ("upsert", "delete"):
                return offset if repair else None
            try:
                nbytes = int(parts[7])
            except ValueError:
                return offset if repair else None
            body_start = newline + 1
            body_end = body_start + nbytes
            if body_end + 1 > length or data[body_end:body_end + 1] != b"\n":
                return offset if repair else None
            record = None
            if parts[1] == "upsert":
                try:
                    record, diagnostics = parse_record(data[body_start:body_end])
                except FatalParseError:
                    return offset if repair else None
            _, op, archive, identifier, datestamp, first_seen, last_updated, _ = parts
            archive, identifier = _unquote(archive), _unquote(identifier)
            header = RecordHeader(identifier=identifier, datestamp=datestamp,
                                  deleted=(op == "delete"))
            self._entries[(archive, identifier)] = CatalogEntry(
                archive=archive, identifier=identifier, header=header,
                record=record, first_seen=first_seen, last_updated=last_updated)
            self._applied += 1
            offset = body_end + 1
        return None

    def _load_sources(self) -> None:
        if not self._sources_path.exists():
            return
        for line in self._sources_path.read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                continue
            source = ArchiveSource(
                id=parts[0], base_url=parts[1],
                last_harvest=None if parts[2] == "-" else parts[2],
                status=parts[3], failures=int(parts[4]))
            self._sources[source.id] = source

    def _save_sources(self) -> None:
        lines = ["# archive-id\tbase-url\tlast-harvest\tstatus\tfailures"]
        for source in sorted(self._sources.values(), key=lambda s: s.id):
            lines.append("\t".join([
                source.id, source.base_url, source.last_harvest or "-",
                source.status, str(source.failures)]))
        tmp = self._sources_path.with_suffix(".tsv.tmp")
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        os.replace(tmp, self._sources_path)

    # -- versions and views ------------------------------------------------

    @property
    def version(self) -> str:
        return f"{self._snapshot_base}.{self._applied}"

    def snapshot(self) -> CatalogSnapshot:
        with self._lock:
            if self._snapshot_cache is None or self._snapshot_cache.version != self.version:
                self._snapshot_cache = CatalogSnapshot(
                    version=self.version, entries=dict(self._entries))
            return self._snapshot_cache

    def stats(self) -> dict[str, dict[str, int]]:
        counts: dict[str, dict[str, int]] = {}
        for entry in self._entries.values():
            bucket = counts.setdefault(entry.archive, {"live": 0, "deleted": 0})
            bucket["deleted" if entry.deleted else "live"] += 1
        return counts

    def check(self) -> None:
        """Raise CatalogError if any structural invariant is broken."""
        total = 0
        for stats in self.stats().values():
            total += stats["live"] + stats["deleted"]
        if total != len(self._entries):
            raise CatalogError("per-archive counts do not sum to the entry count")
        for key, entry in self._entries.items():
            if key != (entry.archive, entry.identifier):
                raise CatalogError(f"entry filed under the wrong key: {key}")
            if entry.deleted and entry.record is not None:
                raise CatalogError(f"tombstone with a record body: {key}")
            if not entry.deleted and entry.record is None:
                raise CatalogError(f"live entry without a record body: {key}")

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, archive: str, identifier: str) -> Optional[CatalogEntry]:
        return self._entries.get((archive, identifier))

    # -- sources ----------------------------------------------------------------

    def register_archive(self, archive_id: str, base_url: str) -> ArchiveSource:
        with self._lock:
            if not _SLUG.match(archive_id):
                raise CatalogError(
                    f"archive id must be a lowercase slug, got {archive_id!r}")
            if archive_id in self._sources:
                raise DuplicateArchiveId(f"archive {archive_id!r} already registered")
            source = ArchiveSource(id=archive_id, base_url=base_url)
            self._sources[archive_id] = source
            self._save_sources()
            return source

    def sources(self) -> list[ArchiveSource]:
        return sorted(self._sources.values(), key=lambda s: s.id)

    def source(self, archive_id: str) -> ArchiveSource:
        try:
            return self._sources[archive_id]
        except KeyError:
            raise UnknownArchive(f"archive {archive_id!r} is not registered") from None

    def register_from_file(self, path: str | Path) -> list[ArchiveSource]:
        """Register any archives from an `id<TAB>base-url` list not yet known."""
        added = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CatalogError(f"bad provider line: {line!r}")
            archive_id, base_url = parts[0].strip(), parts[1].strip()
            if archive_id not in self._sources:
                added.append(self.register_archive(archive_id, base_url))
        return added

    # -- mutation --------------------------------------------------------------

    def _now_string(self) -> str:
        return self._clock().astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    def _journal_write(self, op: str, entry: CatalogEntry) -> None:
        body = b"" if entry.record is None else serialize_record(entry.record)
        head = " ".join([
            _JOURNAL_MAGIC, op, _quote(entry.archive), _quote(entry.identifier),
            entry.header.datestamp, entry.first_seen, entry.last_updated,
            str(len(body))])
        self._journal_file.write(head.encode("utf-8") + b"\n" + body + b"\n")

    def _commit(self) -> None:
        self._journal_file.flush()
        os.fsync(self._journal_file.fileno())

    def _apply(self, archive: str, header: RecordHeader,
               record: Optional[OlacRecord]) -> str:
        """Upsert one harvested record; returns what changed."""
        key = (archive, header.identifier)
        existing = self._entries.get(key)
        now = self._now_string()
        if header.deleted:
            if existing is not None and existing.deleted:
                return "unchanged"
            entry = CatalogEntry(
                archive=archive, identifier=header.identifier, header=header,
                record=None,
                first_seen=existing.first_seen if existing else now,
                last_updated=now)
            self._entries[key] = entry
            self._journal_write("delete", entry)
            self._applied += 1
            return "deleted"
        if existing is not None and not existing.deleted \
                and existing.header == header and existing.record == record:
            return "unchanged"
        entry = CatalogEntry(
            archive=archive, identifier=header.identifier, header=header,
            record=record,
            first_seen=existing.first_seen if existing else now,
            last_updated=now)
        self._entries[key] = entry
        self._journal_write("upsert", entry)
        self._applied += 1
        return "added" if existing is None else "updated"

    def ingest(self, archive: str, items: Iterable[tuple[RecordHeader, Optional[OlacRecord]]]
               ) -> HarvestReport:
        """Apply a stream of (header, record) pairs under one archive id."""
        report = HarvestReport(archive=archive)
        with self._lock:
            try:
                for header, record in items:
                    outcome = self._apply(archive, header, record)
                    if outcome == "added":
                        report.added += 1
                    elif outcome == "updated":
                        report.updated += 1
                    elif outcome == "deleted":
                        report.deleted += 1
            finally:
                self._commit()
        return report

    def import_stream_entries(self, entries: Iterable[StreamEntry]) -> HarvestReport:
        """Load exported stream entries back in, keeping their archive ids."""
        report = HarvestReport(archive="*import*")
        with self._lock:
            try:
                for stream_entry in entries:
                    if not isinstance(stream_entry.record, (OlacRecord, type(None))):
                        report.errors.append(
                            f"{stream_entry.identifier}: not a full record body")
                        continue
                    header = RecordHeader(
                        identifier=stream_entry.identifier,
                        datestamp=stream_entry.datestamp,
                        deleted=stream_entry.deleted)
                    outcome = self._apply(stream_entry.archive, header, stream_entry.record)
                    if outcome == "added":
                        report.added += 1
                    elif outcome == "updated":
                        report.updated += 1
                    elif outcome == "deleted":
                        report.deleted += 1
            finally:
                self._commit()
        return report

    # -- harvesting ------------------------------------------------------------

    def _run_harvest(self, source: ArchiveSource, window: HarvestWindow,
                     transport: Optional[Transport]) -> HarvestReport:
        report = HarvestReport(archive=source.id)
        stream = run_harvest(source.base_url, window, transport=transport)
        try:
            with self._lock:
                try:
                    for header, record in stream:
                        outcome = self._apply(source.id, header, record)
                        if outcome == "added":
                            report.added += 1
                        elif outcome == "updated":
                            report.updated += 1
                        elif outcome == "deleted":
                            report.deleted += 1
                finally:
                    self._commit()
        except ProviderUnreachable as exc:
            report.errors.append(f"provider unreachable: {exc}")
        except ProtocolError as exc:
            report.errors.append(f"protocol error: {exc}")
        with self._lock:
            if report.ok:
                source.last_harvest = stream.response_date or self._now_string()
                source.status = "active"
                source.failures = 0
            else:
                source.failures += 1
                if source.failures >= FAILING_AFTER:
                    source.status = "failing"
            self._save_sources()
        return report

    def harvest_full(self, archive_id: str, *,
                     transport: Optional[Transport] = None) -> HarvestReport:
        """Harvest everything the provider has, deletions included."""
        source = self.source(archive_id)
        return self._run_harvest(source, HarvestWindow(), transport)

    def harvest_incremental(self, archive_id: str, *,
                            transport: Optional[Transport] = None) -> HarvestReport:
        """Harvest changes since the last successful run of this archive."""
        source = self.source(archive_id)
        if source.last_harvest is None:
            raise HarvestStateError(
                f"archive {archive_id!r} has no successful harvest yet; run a full one")
        window = HarvestWindow(from_=source.last_harvest[:10])
        return self._run_harvest(source, window, transport)

    # -- export and re-exposure -------------------------------------------------

    def _sorted_entries(self) -> list[CatalogEntry]:
        return [self._entries[key] for key in sorted(self._entries)]

    def export_stream(self, out, format: str = "olac") -> int:
        """Write every non-deleted entry; returns the number written."""
        if format not in ("olac", "oai_dc"):
            raise CatalogError(f"unknown export format {format!r}")
        snapshot = self.snapshot()
        entries = []
        for key in sorted(snapshot.entries):
            entry = snapshot.entries[key]
            if entry.deleted:
                continue
            body = entry.record if format == "olac" \
                else to_simple_dc(entry.record, self._registry)
            entries.append(StreamEntry(
                archive=entry.archive, identifier=entry.identifier,
                datestamp=entry.header.datestamp, deleted=False, record=body))
        write_stream(entries, out)
        return len(entries)

    def export_bytes(self, format: str = "olac") -> bytes:
        buffer = io.BytesIO()
        self.export_stream(buffer, format=format)
        return buffer.getvalue()

    def provider_source(self, identity: ProviderIdentity) -> "CatalogRecordSource":
        """Adapter re-exposing the union through the provider endpoint."""
        return CatalogRecordSource(self.snapshot(), identity)

    def compact(self) -> int:
        """Write a fresh snapshot, reset the journal; returns the new id."""
        with self._lock:
            new_id = self._snapshot_base + 1
            tmp = self._snapshot_path(new_id).with_suffix(".olacx.tmp")
            with open(tmp, "wb") as handle:
                for entry in self._sorted_entries():
                    body = b"" if entry.record is None else serialize_record(entry.record)
                    op = "delete" if entry.deleted else "upsert"
                    head = " ".join([
                        _JOURNAL_MAGIC, op, _quote(entry.archive),
                        _quote(entry.identifier), entry.header.datestamp,
                        entry.first_seen, entry.last_updated, str(len(body))])
                    handle.write(head.encode("utf-8") + b"\n" + body + b"\n")
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, self._snapshot_path(new_id))
            self._journal_file.close()
            self._journal_file = open(self._journal_path, "wb")
            self._commit()
            self._journal_file.close()
            self._journal_file = open(self._journal_path, "ab")
            old_base = self._snapshot_base
            self._snapshot_base = new_id
            self._applied = 0
            if old_base and self._snapshot_path(old_base).exists():
                self._snapshot_path(old_base).unlink()
            return new_id

    def close(self) -> None:
        if self._journal_file is not None and not self._journal_file.closed:
            self._commit()
            self._journal_file.close()

    def __enter__(self) -> "Catalog":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class CatalogRecordSource:
    """Record-source view of a catalog snapshot for the data provider.

    Identifiers are re-namespaced as `<archive>:<record identifier>` so the
    union can itself be harvested; archive ids never contain a colon, so the
    first colon splits unambiguously.
    """

    def __init__(self, snapshot: CatalogSnapshot, identity: ProviderIdentity):
        self._snapshot = snapshot
        self.identity = identity
        self._by_id: dict[str, CatalogEntry] = {
            f"{entry.archive}:{entry.identifier}": entry
            for entry in snapshot.entries.values()
        }
        self._headers = sorted(
            (RecordHeader(identifier=f"{e.archive}:{e.identifier}",
                          datestamp=e.header.datestamp, deleted=e.deleted)
             for e in snapshot.entries.values()),
            key=lambda h: (h.datestamp, h.identifier))

    @property
    def snapshot_id(self) -> str:
        return self._snapshot.version

    def headers(self) -> list[RecordHeader]:
        return self._headers

    def get(self, identifier: str):
        entry = self._by_id.get(identifier)
        if entry is None:
            return None
        header = RecordHeader(identifier=identifier,
                              datestamp=entry.header.datestamp, deleted=entry.deleted)
        return header, entry.record
