"""Builds the deterministic catalog behind the UI tests.

Usage: python3 seed_catalog.py <workdir>

Writes <workdir>/catalog plus <workdir>/olacat.json and guarantees that
every linguistic-type and discourse-type term occurs at least once, so the
facet selectors are expected to list the complete vocabularies.
"""

import json
import sys
from pathlib import Path

from olacat.catalog import Catalog
from olacat.oai.provider import RecordHeader
from olacat.record import MetadataElement, OlacRecord
from olacat.vocab import default_registry

TYPES = ["lexicon", "primary_text", "language_description"]
DISCOURSE = sorted(default_registry().vocabulary("discourse-type").codes)
FIELDS = ["syntax", "phonology", "semantics", "lexicography"]
ROLES = ["speaker", "transcriber", "author", "recorder"]
LANGS = ["x-sil-fia", "x-sil-llu", "x-sil-mge", "x-sil-stc", "en", "x-sil-eng",
         "fr", "de", "qu", "sw"]
NAMES = ["Smith, J.", "Garcia, Maria", "Okafor, Ada", "Tanaka, Yuki"]
WORDS = ["grammar", "wordlist", "stories", "recordings", "fieldnotes",
         "paradigms", "texts", "survey"]


def build(workdir: Path) -> None:
    catalog = Catalog(workdir / "catalog")
    registry = default_registry()
    entries = []
    n = 0

    def add(archive, elements, day):
        nonlocal n
        n += 1
        entries.append((archive, RecordHeader(f"rec-{n:03d}", day),
                        OlacRecord(tuple(elements))))

    for i in range(60):
        lang = LANGS[i % len(LANGS)]
        lang_name = registry.resolved_language_name(lang) or lang
        elements = [
            MetadataElement(name="title",
                            content=f"{lang_name} {WORDS[i % len(WORDS)]}"),
            MetadataElement(name="language", qualifier="language", code=lang,
                            content=lang_name),
            MetadataElement(name="type", qualifier="linguistic-type",
                            code=TYPES[i % len(TYPES)]),
            MetadataElement(name="description",
                            content=f"Collected {WORDS[(i + 3) % len(WORDS)]} "
                                    f"and {WORDS[(i + 5) % len(WORDS)]}."),
        ]
        if i % 2 == 0:
            elements.append(MetadataElement(
                name="subject", qualifier="language",
                code=LANGS[(i + 4) % len(LANGS)]))
        if i % 3 == 0:
            elements.append(MetadataElement(
                name="subject", qualifier="linguistic-field",
                code=FIELDS[i % len(FIELDS)]))
        if i % 2 == 1:
            elements.append(MetadataElement(
                name="contributor", qualifier="role",
                code=ROLES[i % len(ROLES)], content=NAMES[i % len(NAMES)]))
        add("alpha" if i % 2 == 0 else "beta", elements,
            f"2002-{(i % 12) + 1:02d}-{(i % 27) + 1:02d}")

    for i, code in enumerate(DISCOURSE):
        add("alpha", [
            MetadataElement(name="title", content=f"Session {code}"),
            MetadataElement(name="type", qualifier="discourse-type", code=code),
            MetadataElement(name="language", qualifier="language",
                            code=LANGS[i % len(LANGS)]),
        ], f"2003-01-{i + 1:02d}")

    # the precision pair: coded Mango language vs mango the fruit
    add("beta", [
        MetadataElement(name="title", content="Mango verb morphology"),
        MetadataElement(name="language", qualifier="language",
                        code="x-sil-mge", content="Mango"),
        MetadataElement(name="type", qualifier="linguistic-type",
                        code="language_description"),
    ], "2003-02-01")
    add("beta", [
        MetadataElement(name="title", content="Mango cultivation handbook"),
        MetadataElement(name="description",
                        content="Growing mango orchards for market."),
        MetadataElement(name="language", qualifier="language", code="en"),
        MetadataElement(name="type", content="Text"),
    ], "2003-02-02")

    for archive_id in ("alpha", "beta"):
        catalog.ingest(archive_id, [(h, r) for a, h, r in entries if a == archive_id])
    catalog.check()
    catalog.close()

    config = {"catalog_dir": str(workdir / "catalog"),
              "repository_name": "UI Test Union"}
    (workdir / "olacat.json").write_text(json.dumps(config), encoding="utf-8")
    print(f"seeded {n} records")


if __name__ == "__main__":
    build(Path(sys.argv[1]))
