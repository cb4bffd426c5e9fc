"""Shared fixtures: deterministic corpora and an in-process federation."""

from __future__ import annotations

import random
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import pytest

from olacat.catalog import Catalog
from olacat.oai.provider import DataProvider, InMemorySource, ProviderIdentity, RecordHeader
from olacat.record import MetadataElement, OlacRecord
from olacat.vocab import default_registry

import corpus

FIXTURES = Path(__file__).parent / "fixtures"


def fixed_clock(year=2003, month=6, day=1, hour=12):
    stamp = datetime(year, month, day, hour, tzinfo=timezone.utc)
    return lambda: stamp


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture
def fresh_registry():
    """An isolated registry instance for tests that register extensions."""
    from olacat.vocab import load_packaged_registry
    return load_packaged_registry()


@pytest.fixture
def bloomfield_bytes():
    return (FIXTURES / "bloomfield.xml").read_bytes()


@pytest.fixture
def bloomfield_record():
    return OlacRecord((
        MetadataElement(name="creator", content="Bloomfield, Leonard"),
        MetadataElement(name="date", content="1933"),
        MetadataElement(name="title", content="Language"),
        MetadataElement(name="publisher", content="New York: Holt"),
    ))


class Federation:
    """A set of in-process providers plus a transport that routes to them."""

    def __init__(self, clock=None):
        self.sources: dict[str, InMemorySource] = {}
        self.providers: dict[str, DataProvider] = {}
        self.clock = clock or fixed_clock()
        self.request_log: list[str] = []

    def base_url(self, archive_id: str) -> str:
        return f"http://{archive_id}.test/oai"

    def add_provider(self, archive_id: str, page_size: int = 500) -> InMemorySource:
        identity = ProviderIdentity(
            repository_name=f"Archive {archive_id}",
            base_url=self.base_url(archive_id))
        source = InMemorySource(identity)
        self.sources[archive_id] = source
        self.providers[archive_id] = DataProvider(
            source, page_size=page_size, clock=self.clock,
            secret=archive_id.encode())
        return source

    def transport(self, url: str) -> bytes:
        self.request_log.append(url)
        host = urlparse(url).hostname or ""
        archive_id = host.split(".")[0]
        provider = self.providers[archive_id]
        return provider.handle_request(parse_qs(urlparse(url).query,
                                                keep_blank_values=True))


@pytest.fixture
def federation():
    return Federation()


@pytest.fixture
def small_catalog(tmp_path):
    """A 40-record single-archive catalog for protocol and search tests."""
    catalog = Catalog(tmp_path / "catalog", clock=fixed_clock())
    rng = random.Random(7)
    items = []
    for i in range(40):
        record = corpus.random_record(rng)
        items.append((RecordHeader(f"itm-{i:03d}", corpus.random_day(rng)), record))
    catalog.ingest("fix", items)
    return catalog


@pytest.fixture(scope="session")
def thousand_entry_catalog(tmp_path_factory):
    """The randomized 1,000-entry catalog used by search properties."""
    catalog = Catalog(tmp_path_factory.mktemp("cat1000"), clock=fixed_clock())
    rng = random.Random(20020208)
    for archive_id, count in (("alpha", 400), ("beta", 350), ("gamma", 250)):
        items = []
        for i in range(count):
            record = corpus.random_record(rng)
            items.append((RecordHeader(f"itm-{i:04d}", corpus.random_day(rng)), record))
        catalog.ingest(archive_id, items)
    return catalog
