"""Language-archive metadata toolkit.

Typed qualified-Dublin-Core records, controlled vocabularies, XML round
tripping, conformance validation, crosswalks to simple DC and display form,
a harvesting protocol provider/client pair, a persistent union catalog, and
a faceted search service.
"""

__version__ = "0.1.0"

from olacat.record import (
    DC_ELEMENTS,
    ENCODING_SCHEMES,
    OLAC_VOCABULARIES,
    InvariantViolation,
    MetadataElement,
    OlacRecord,
    RefinementTable,
)
from olacat.vocab import (
    AliasTable,
    LanguageCode,
    MalformedTag,
    VocabularyRegistry,
    default_registry,
    parse_language_code,
)

__all__ = [
    "DC_ELEMENTS",
    "ENCODING_SCHEMES",
    "OLAC_VOCABULARIES",
    "InvariantViolation",
    "MetadataElement",
    "OlacRecord",
    "RefinementTable",
    "AliasTable",
    "LanguageCode",
    "MalformedTag",
    "VocabularyRegistry",
    "default_registry",
    "parse_language_code",
]
