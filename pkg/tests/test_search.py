import random

import pytest

from olacat.catalog import Catalog
from olacat.oai.provider import RecordHeader
from olacat.record import MetadataElement, OlacRecord
from olacat.search import (
    EmptyQuery,
    FacetValue,
    Query,
    UnknownFacet,
    build_index,
    execute,
    facet_values,
    result_to_json,
)

import corpus
import oracle
from conftest import fixed_clock


def put(catalog, archive, identifier, elements, day="2002-01-01"):
    catalog.ingest(archive, [(RecordHeader(identifier, day),
                              OlacRecord(tuple(elements)))])


@pytest.fixture
def mango_catalog(tmp_path):
    """The precision fixture: a coded language record vs a fruit record."""
    catalog = Catalog(tmp_path, clock=fixed_clock())
    put(catalog, "fix", "mango-lang", [
        MetadataElement(name="title", content="Mango verb morphology"),
        MetadataElement(name="language", qualifier="language", code="x-sil-MGE",
                        content="Mango"),
        MetadataElement(name="type", qualifier="linguistic-type",
                        code="language_description"),
    ])
    put(catalog, "fix", "mango-fruit", [
        MetadataElement(name="title", content="Mango cultivation handbook"),
        MetadataElement(name="description",
                        content="Growing mango orchards for market."),
        MetadataElement(name="language", qualifier="language", code="en"),
    ])
    return catalog


def test_empty_catalog_builds_empty_index(tmp_path):
    index = build_index(Catalog(tmp_path).snapshot())
    assert index.keys() == set()
    assert facet_values(index, "language") == []


def test_subject_language_posting_lands_in_code_class(tmp_path, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    put(catalog, "fix", "r1", [
        MetadataElement(name="title", content="T"),
        MetadataElement(name="subject", qualifier="language", code="x-sil-BAN"),
    ])
    index = build_index(catalog.snapshot(), registry)
    assert index.facets["subject_language"] == {"x-sil-ban": {("fix", "r1")}}


def test_rebuild_on_same_snapshot_is_identical(thousand_entry_catalog, registry):
    snapshot = thousand_entry_catalog.snapshot()
    assert build_index(snapshot, registry) == build_index(snapshot, registry)


def test_precision_fixture(mango_catalog, registry):
    index = build_index(mango_catalog.snapshot(), registry)
    coded = execute(index, Query(language="Mango"), registry)
    assert [i.identifier for i in coded.items] == ["mango-lang"]
    free = execute(index, Query(free_text="mango"), registry)
    assert {i.identifier for i in free.items} == {"mango-lang", "mango-fruit"}


def test_name_query_equals_code_query(thousand_entry_catalog, registry):
    index = build_index(thousand_entry_catalog.snapshot(), registry)
    by_name = execute(index, Query(subject_language="Fedija"), registry)
    by_code = execute(index, Query(subject_language="x-sil-FIA"), registry)
    assert by_name == by_code


def test_query_matching_nothing(thousand_entry_catalog, registry):
    index = build_index(thousand_entry_catalog.snapshot(), registry)
    result = execute(index, Query(free_text="zzzznothing"), registry)
    assert result.total == 0
    assert result.items == ()
    assert result.facets == {}


def test_empty_query_raises(thousand_entry_catalog, registry):
    index = build_index(thousand_entry_catalog.snapshot(), registry)
    with pytest.raises(EmptyQuery):
        execute(index, Query(), registry)


def test_free_text_scoring_ranks_multi_token_matches_first(tmp_path, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    put(catalog, "fix", "both", [
        MetadataElement(name="title", content="verb tone paradigms")])
    put(catalog, "fix", "one", [
        MetadataElement(name="title", content="tone sandhi notes")])
    index = build_index(catalog.snapshot(), registry)
    result = execute(index, Query(free_text="verb tone"), registry)
    assert [(i.identifier, i.score) for i in result.items] == [("both", 2), ("one", 1)]


def test_facet_counts_over_typed_corpus(tmp_path, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    for i, code in enumerate(("lexicon", "lexicon", "primary_text")):
        put(catalog, "fix", f"r{i}", [
            MetadataElement(name="title", content=f"T{i}"),
            MetadataElement(name="type", qualifier="linguistic-type", code=code),
        ])
    index = build_index(catalog.snapshot(), registry)
    values = facet_values(index, "linguistic_type", registry)
    assert values == [
        FacetValue(value="lexicon", label="lexicon", count=2),
        FacetValue(value="primary_text", label="primary text", count=1),
    ]


def test_unknown_facet_id(thousand_entry_catalog, registry):
    index = build_index(thousand_entry_catalog.snapshot(), registry)
    with pytest.raises(UnknownFacet):
        facet_values(index, "flavor", registry)


def test_facet_match_is_by_code_never_substring(tmp_path, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    put(catalog, "fix", "r1", [
        MetadataElement(name="title", content="T"),
        MetadataElement(name="type", qualifier="linguistic-type", code="lexicon"),
    ])
    index = build_index(catalog.snapshot(), registry)
    assert execute(index, Query(linguistic_type="lex"), registry).total == 0
    assert execute(index, Query(linguistic_type="LEXICON"), registry).total == 1


def test_equivalent_iso_and_extension_codes_are_one_facet(tmp_path, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    put(catalog, "fix", "iso", [
        MetadataElement(name="title", content="A"),
        MetadataElement(name="language", qualifier="language", code="en")])
    put(catalog, "fix", "ext", [
        MetadataElement(name="title", content="B"),
        MetadataElement(name="language", qualifier="language", code="x-sil-ENG")])
    index = build_index(catalog.snapshot(), registry)
    assert execute(index, Query(language="en"), registry).total == 2
    assert execute(index, Query(language="x-sil-eng"), registry).total == 2
    values = facet_values(index, "language", registry)
    assert values == [FacetValue(value="en", label="English", count=2)]


def test_snapshot_isolation(tmp_path, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    put(catalog, "fix", "first", [MetadataElement(name="title", content="tone")])
    index = build_index(catalog.snapshot(), registry)
    put(catalog, "fix", "second", [MetadataElement(name="title", content="tone")])
    result = execute(index, Query(free_text="tone"), registry)
    assert [i.identifier for i in result.items] == ["first"]
    assert index.snapshot_id != catalog.version


def test_deleted_entries_are_not_indexed(tmp_path, registry):
    catalog = Catalog(tmp_path, clock=fixed_clock())
    put(catalog, "fix", "gone", [MetadataElement(name="title", content="tone")])
    catalog.ingest("fix", [(RecordHeader("gone", "2002-02-01", deleted=True), None)])
    index = build_index(catalog.snapshot(), registry)
    assert execute(index, Query(free_text="tone"), registry).total == 0


# -- oracle equivalence and properties ------------------------------------------


def test_execute_matches_brute_force_oracle(thousand_entry_catalog, registry):
    snapshot = thousand_entry_catalog.snapshot()
    index = build_index(snapshot, registry)
    rng = random.Random(42)
    checked = 0
    for _ in range(60):
        query = Query(**corpus.random_query_kwargs(rng))
        result = execute(index, query, registry)
        ranked, scores, counts = oracle.oracle_execute(snapshot, query, registry)
        assert [i.key for i in result.items] == ranked
        assert [i.score for i in result.items] == [scores[k] for k in ranked]
        assert result.facets == counts
        assert result.total == len(ranked)
        checked += 1
    assert checked == 60


def test_adding_criterion_never_increases_total(thousand_entry_catalog, registry):
    index = build_index(thousand_entry_catalog.snapshot(), registry)
    rng = random.Random(17)
    for _ in range(40):
        kwargs = corpus.random_query_kwargs(rng)
        base = execute(index, Query(**kwargs), registry)
        extras = {
            "linguistic_type": "lexicon", "role": "speaker",
            "archive": "alpha", "free_text": "grammar",
        }
        for fname, fvalue in extras.items():
            if fname in kwargs:
                continue
            narrowed = execute(index, Query(**{**kwargs, fname: fvalue}), registry)
            assert narrowed.total <= base.total


def test_result_json_shape(mango_catalog, registry):
    index = build_index(mango_catalog.snapshot(), registry)
    payload = result_to_json(execute(index, Query(free_text="mango"), registry))
    assert set(payload) == {"snapshot", "total", "items", "facets"}
    assert all(set(item) == {"archive", "id", "title", "language", "type", "snippet"}
               for item in payload["items"])
    paged = result_to_json(execute(index, Query(free_text="mango"), registry),
                           offset=1, limit=1)
    assert paged["total"] == 2
    assert len(paged["items"]) == 1
