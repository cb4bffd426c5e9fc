import random

import pytest

from olacat.catalog import (
    Catalog,
    DuplicateArchiveId,
    HarvestStateError,
    UnknownArchive,
)
from olacat.crosswalk import to_simple_dc
from olacat.oai.harvester import TransportFailure
from olacat.oai.provider import RecordHeader
from olacat.record import MetadataElement, OlacRecord
from olacat.xmlio import read_stream

import corpus
from conftest import fixed_clock


def projection(catalog):
    """Comparable state: header and record per key, ignoring bookkeeping."""
    return {key: (entry.header, entry.record)
            for key, entry in catalog.snapshot().entries.items()}


def fill_provider(source, n, rng=None, prefix="itm"):
    rng = rng or random.Random(1)
    for i in range(n):
        source.put(RecordHeader(f"{prefix}-{i:04d}", corpus.random_day(rng)),
                   corpus.random_record(rng))


# -- registration -----------------------------------------------------------------


def test_register_archive(tmp_path):
    catalog = Catalog(tmp_path)
    source = catalog.register_archive("ldc", "http://ldc.test/oai")
    assert source.status == "active"
    assert source.last_harvest is None


def test_register_duplicate_id(tmp_path):
    catalog = Catalog(tmp_path)
    catalog.register_archive("ldc", "http://ldc.test/oai")
    with pytest.raises(DuplicateArchiveId):
        catalog.register_archive("ldc", "http://other.test/oai")


def test_register_rejects_non_slug(tmp_path):
    catalog = Catalog(tmp_path)
    with pytest.raises(Exception):
        catalog.register_archive("has:colon", "http://x.test/oai")


def test_register_twenty_archives_order_independent(tmp_path):
    ids = [f"arch-{i:02d}" for i in range(20)]
    shuffled = ids[:]
    random.Random(3).shuffle(shuffled)
    catalog = Catalog(tmp_path / "a")
    for archive_id in shuffled:
        catalog.register_archive(archive_id, f"http://{archive_id}.test/oai")
    assert {s.id for s in catalog.sources()} == set(ids)
    catalog.close()
    reloaded = Catalog(tmp_path / "a")
    assert {s.id for s in reloaded.sources()} == set(ids)


def test_unknown_archive(tmp_path):
    catalog = Catalog(tmp_path)
    with pytest.raises(UnknownArchive):
        catalog.harvest_full("ghost")


# -- harvesting --------------------------------------------------------------------


def test_fresh_provider_adds_every_record(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 17)
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    report = catalog.harvest_full("arch-a", transport=federation.transport)
    assert (report.added, report.updated, report.deleted) == (17, 0, 0)
    assert len(catalog) == 17
    assert catalog.source("arch-a").last_harvest is not None


def test_reharvest_unchanged_is_all_zero(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 9)
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    version = catalog.version
    report = catalog.harvest_full("arch-a", transport=federation.transport)
    assert (report.added, report.updated, report.deleted) == (0, 0, 0)
    assert catalog.version == version


def test_incremental_requires_history(tmp_path, federation):
    federation.add_provider("arch-a")
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    with pytest.raises(HarvestStateError):
        catalog.harvest_incremental("arch-a", transport=federation.transport)


def test_incremental_changes_match_full_harvest_diff(tmp_path, federation):
    rng = random.Random(8)
    source = federation.add_provider("arch-a")
    fill_provider(source, 30, rng)
    catalog = Catalog(tmp_path / "inc", clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)

    source.put(RecordHeader("new-1", "2003-07-01"), corpus.random_record(rng))
    source.put(RecordHeader("new-2", "2003-07-02"), corpus.random_record(rng))
    source.put(RecordHeader("itm-0003", "2003-07-03"), corpus.random_record(rng))
    source.delete("itm-0005", "2003-07-04")

    report = catalog.harvest_incremental("arch-a", transport=federation.transport)
    assert (report.added, report.updated, report.deleted) == (2, 1, 1)
    assert catalog.get("arch-a", "itm-0005").deleted

    # oracle: a from-scratch full harvest must land on the same state
    fresh = Catalog(tmp_path / "fresh", clock=federation.clock)
    fresh.register_archive("arch-a", federation.base_url("arch-a"))
    fresh.harvest_full("arch-a", transport=federation.transport)
    assert projection(catalog) == projection(fresh)


def test_unreachable_provider_leaves_catalog_untouched(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 5)
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    stamp = catalog.source("arch-a").last_harvest
    state = projection(catalog)

    def dead(url):
        raise TransportFailure("refused")

    report = catalog.harvest_full("arch-a", transport=dead)
    assert not report.ok
    assert projection(catalog) == state
    assert catalog.source("arch-a").last_harvest == stamp
    assert catalog.source("arch-a").failures == 1


def test_three_failures_mark_source_failing(tmp_path, federation):
    federation.add_provider("arch-a")
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))

    def dead(url):
        raise TransportFailure("refused")

    for _ in range(3):
        catalog.harvest_full("arch-a", transport=dead)
    assert catalog.source("arch-a").status == "failing"
    # a later success recovers the source
    catalog.harvest_full("arch-a", transport=federation.transport)
    assert catalog.source("arch-a").status == "active"
    assert catalog.source("arch-a").failures == 0


def test_protocol_error_mid_stream_keeps_catalog_consistent(tmp_path, federation):
    source = federation.add_provider("arch-a", page_size=4)
    fill_provider(source, 10)
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    calls = {"n": 0}

    def breaking(url):
        calls["n"] += 1
        if calls["n"] == 2:
            return b"<html>this is not a protocol response</html>"
        return federation.transport(url)

    report = catalog.harvest_full("arch-a", transport=breaking)
    assert not report.ok
    assert report.added == 4  # the first page landed
    assert catalog.source("arch-a").last_harvest is None
    catalog.check()
    catalog.close()
    reloaded = Catalog(tmp_path, clock=federation.clock)
    reloaded.check()
    assert len(reloaded) == 4
    # the next full harvest completes and converges
    report = reloaded.harvest_full("arch-a", transport=federation.transport)
    assert report.ok
    assert len(reloaded) == 10


# -- convergence -------------------------------------------------------------------


def test_incremental_after_each_mutation_equals_single_full(tmp_path, federation):
    rng = random.Random(13)
    source = federation.add_provider("arch-a")
    fill_provider(source, 25, rng)
    catalog = Catalog(tmp_path / "steps", clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    day = 1
    for _ in range(6):
        for _ in range(rng.randint(1, 4)):
            action = rng.random()
            stamp = f"2003-08-{day:02d}"
            day += 1
            live = [h.identifier for h in source.headers() if not h.deleted]
            if action < 0.4 or not live:
                source.put(RecordHeader(f"mut-{day}", stamp), corpus.random_record(rng))
            elif action < 0.8:
                source.put(RecordHeader(rng.choice(live), stamp), corpus.random_record(rng))
            else:
                source.delete(rng.choice(live), stamp)
        catalog.harvest_incremental("arch-a", transport=federation.transport)
    final = Catalog(tmp_path / "final", clock=federation.clock)
    final.register_archive("arch-a", federation.base_url("arch-a"))
    final.harvest_full("arch-a", transport=federation.transport)
    assert projection(catalog) == projection(final)


# -- persistence --------------------------------------------------------------------


def test_reload_reproduces_state(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 12)
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    state = projection(catalog)
    catalog.close()
    reloaded = Catalog(tmp_path, clock=federation.clock)
    assert projection(reloaded) == state
    reloaded.check()


def test_compaction_preserves_state_and_resets_journal(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 8)
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    source.delete("itm-0002", "2003-09-01")
    catalog.harvest_incremental("arch-a", transport=federation.transport)
    state = projection(catalog)
    snapshot_id = catalog.compact()
    assert (tmp_path / f"snapshot-{snapshot_id}.olacx").exists()
    assert (tmp_path / "journal.olacx").stat().st_size == 0
    catalog.close()
    reloaded = Catalog(tmp_path, clock=federation.clock)
    assert projection(reloaded) == state
    assert reloaded.get("arch-a", "itm-0002").deleted
    reloaded.check()


def test_journal_truncation_reloads_to_consistent_prefix(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 15)
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    catalog.close()
    journal = (tmp_path / "journal.olacx").read_bytes()
    rng = random.Random(99)
    for _ in range(10):
        cut = rng.randrange(1, len(journal))
        (tmp_path / "journal.olacx").write_bytes(journal[:cut])
        reloaded = Catalog(tmp_path, clock=federation.clock)
        reloaded.check()
        assert len(reloaded) <= 15
        reloaded.close()
    # full journal still loads everything
    (tmp_path / "journal.olacx").write_bytes(journal)
    assert len(Catalog(tmp_path, clock=federation.clock)) == 15


def test_version_changes_on_every_committed_mutation(tmp_path):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    v0 = catalog.version
    catalog.ingest("arch", [(RecordHeader("a", "2002-01-01"),
                             OlacRecord((MetadataElement(name="title", content="T"),)))])
    v1 = catalog.version
    assert v0 != v1
    snapshot = catalog.snapshot()
    catalog.ingest("arch", [(RecordHeader("b", "2002-01-02"),
                             OlacRecord((MetadataElement(name="title", content="U"),)))])
    assert snapshot.version == v1
    assert len(snapshot.entries) == 1  # old snapshot is isolated


# -- export ------------------------------------------------------------------------


def test_export_empty_catalog(tmp_path):
    catalog = Catalog(tmp_path)
    entries, diagnostics = read_stream(catalog.export_bytes("olac"))
    assert entries == [] and diagnostics == []


def test_export_round_trip_reimports_identically(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 3)
    catalog = Catalog(tmp_path / "one", clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    entries, diagnostics = read_stream(catalog.export_bytes("olac"))
    assert diagnostics == [] and len(entries) == 3
    second = Catalog(tmp_path / "two", clock=federation.clock)
    second.import_stream_entries(entries)
    assert projection(second) == projection(catalog)


def test_export_excludes_tombstones(tmp_path, federation):
    source = federation.add_provider("arch-a")
    fill_provider(source, 4)
    source.delete("itm-0001", "2003-01-01")
    catalog = Catalog(tmp_path, clock=federation.clock)
    catalog.register_archive("arch-a", federation.base_url("arch-a"))
    catalog.harvest_full("arch-a", transport=federation.transport)
    entries, _ = read_stream(catalog.export_bytes("olac"))
    assert len(entries) == 3
    assert all(not e.deleted for e in entries)


def test_oai_dc_export_is_the_simple_dc_form(tmp_path, bloomfield_record, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    catalog.ingest("arch", [(RecordHeader("bloomfield", "2002-01-01"),
                             bloomfield_record)])
    entries, diagnostics = read_stream(catalog.export_bytes("oai_dc"))
    assert diagnostics == []
    assert entries[0].record == to_simple_dc(bloomfield_record, registry)
