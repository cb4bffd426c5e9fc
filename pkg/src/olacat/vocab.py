"""Controlled vocabularies, structured language identifiers, and name aliases.

Four closed vocabularies ship with the package (role, linguistic-type,
discourse-type, linguistic-field).  Language identification is an open code
scheme: two-letter and three-letter standard codes plus `x-<namespace>-<code>`
extension tags.  A fixture table of known codes, a language-name alias table
and a code-equivalence table ship alongside; all three are plain TSV so they
can be replaced by deployment-specific data.

The registry built from these files is read-only after startup; concurrent
readers need no coordination.  Registering a third-party vocabulary after
startup must be serialized by the caller.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional


class VocabError(ValueError):
    """Base class for vocabulary and language-code failures."""


class UnknownVocabulary(VocabError):
    """Lookup against a vocabulary id that is not registered."""


class TermNotFound(VocabError):
    """The code is not a member of the (registered) vocabulary."""


class MalformedTag(VocabError):
    """A language tag that does not match any of the accepted shapes."""


class DuplicateVocabulary(VocabError):
    """A definition file tries to redefine an accepted vocabulary."""


class VocabularyParseError(VocabError):
    """A vocabulary definition file could not be parsed."""


ACCEPTED_VOCABULARIES = ("role", "linguistic-type", "discourse-type", "linguistic-field")


def normalize_term(code: str) -> str:
    """Lookup key for vocabulary terms: case-folded, `_` treated as space."""
    return " ".join(code.replace("_", " ").split()).casefold()


def normalize_name(name: str) -> str:
    """Lookup key for language names: case-folded, whitespace collapsed."""
    return " ".join(name.split()).casefold()


@dataclass(frozen=True)
class VocabTerm:
    code: str
    label: str


class Vocabulary:
    """A closed enumeration of legal code values with human labels."""

    def __init__(self, vocab_id: str, terms: Iterable[VocabTerm], status: str = "accepted"):
        if status not in ("accepted", "third-party"):
            raise VocabError(f"bad vocabulary status: {status!r}")
        self.id = vocab_id
        self.status = status
        self._terms: dict[str, VocabTerm] = {}
        for term in terms:
            self._terms[normalize_term(term.code)] = term

    def lookup(self, code: str) -> VocabTerm:
        term = self._terms.get(normalize_term(code))
        if term is None:
            raise TermNotFound(f"{code!r} is not in vocabulary {self.id!r}")
        return term

    def __contains__(self, code: str) -> bool:
        return normalize_term(code) in self._terms

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def terms(self) -> list[VocabTerm]:
        return sorted(self._terms.values(), key=lambda t: t.code)

    @property
    def codes(self) -> set[str]:
        return {t.code for t in self._terms.values()}


_SUBTAG = re.compile(r"^[A-Za-z0-9]{1,8}$")
_LETTERS = re.compile(r"^[A-Za-z]+$")


@dataclass(frozen=True)
class LanguageCode:
    """A structured language identifier.

    `scheme` is `iso639-1` (two letters), `iso639-2` (three letters) or
    `extension` (an `x-<namespace>-<code>` private-use tag).  `raw` keeps the
    tag exactly as written so serialization can reproduce the input;
    `canonical()` lowercases, which is the form used for facet grouping.
    """

    scheme: str
    code: str
    namespace: Optional[str] = None
    raw: str = ""

    def __post_init__(self):
        if not self.raw:
            object.__setattr__(self, "raw", self._assemble())

    def _assemble(self) -> str:
        if self.scheme == "extension":
            return f"x-{self.namespace}-{self.code}"
        return self.code

    def canonical(self) -> str:
        """Lowercased tag; equal canonical forms denote the same identifier."""
        return self._assemble().lower()

    def __str__(self) -> str:
        return self.raw


def parse_language_code(tag: str) -> LanguageCode:
    """Parse a language tag into its structured form.

    Accepted shapes: exactly two ASCII letters (iso639-1), exactly three
    (iso639-2), or `x-<namespace>-<code>` where namespace is one subtag and
    code is one or more.  Anything else raises :class:`MalformedTag`.
    """
    if not isinstance(tag, str) or not tag:
        raise MalformedTag("empty language tag")
    if _LETTERS.match(tag):
        if len(tag) == 2:
            return LanguageCode(scheme="iso639-1", code=tag, raw=tag)
        if len(tag) == 3:
            return LanguageCode(scheme="iso639-2", code=tag, raw=tag)
        raise MalformedTag(f"bare code must be 2 or 3 letters: {tag!r}")
    parts = tag.split("-")
    if parts[0].lower() != "x" or len(parts) < 3:
        raise MalformedTag(f"not a valid language tag: {tag!r}")
    namespace, code_parts = parts[1], parts[2:]
    if not _SUBTAG.match(namespace):
        raise MalformedTag(f"bad extension namespace in {tag!r}")
    for part in code_parts:
        if not _SUBTAG.match(part):
            raise MalformedTag(f"bad subtag {part!r} in {tag!r}")
    return LanguageCode(
        scheme="extension", namespace=namespace, code="-".join(code_parts), raw=tag
    )


class AliasTable:
    """Maps normalized language names to the codes they may denote.

    The same normalization (case-fold, trim, collapse internal whitespace)
    is applied on load and on lookup, so any spelling that normalizes alike
    resolves alike.  File format: `name<TAB>tag` per line, names repeatable.
    """

    def __init__(self, entries: Iterable[tuple[str, LanguageCode]] = ()):
        self._entries: dict[str, set[LanguageCode]] = {}
        for name, code in entries:
            self._entries.setdefault(normalize_name(name), set()).add(code)

    @classmethod
    def from_file(cls, path: str | Path) -> "AliasTable":
        entries = []
        for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise VocabularyParseError(
                    f"{path}:{lineno}: expected 'name<TAB>tag', got {line!r}"
                )
            entries.append((parts[0], parse_language_code(parts[1].strip())))
        return cls(entries)

    def resolve(self, name: str) -> frozenset[LanguageCode]:
        return frozenset(self._entries.get(normalize_name(name), ()))

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self._entries

    def items(self) -> list[tuple[str, frozenset[LanguageCode]]]:
        return [(n, frozenset(c)) for n, c in sorted(self._entries.items())]

    def __len__(self) -> int:
        return len(self._entries)


def resolve_language_name(name: str, table: AliasTable) -> frozenset[LanguageCode]:
    """All codes whose alias sets contain the normalized name; may be empty."""
    return table.resolve(name)


class CodeEquivalences:
    """Equivalence classes between standard and extension language codes.

    Where a two-letter code and an extension code denote the same language,
    search treats them as one facet value.  File format: `iso<TAB>extension`
    per line.  Classes are keyed and returned in canonical (lowercase) form.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        self._class_of: dict[str, frozenset[str]] = {}
        for iso, ext in pairs:
            a = parse_language_code(iso).canonical()
            b = parse_language_code(ext).canonical()
            merged = {a, b} | set(self._class_of.get(a, ())) | set(self._class_of.get(b, ()))
            frozen = frozenset(merged)
            for member in frozen:
                self._class_of[member] = frozen

    @classmethod
    def from_file(cls, path: str | Path) -> "CodeEquivalences":
        pairs = []
        for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise VocabularyParseError(
                    f"{path}:{lineno}: expected 'iso<TAB>extension', got {line!r}"
                )
            pairs.append((parts[0].strip(), parts[1].strip()))
        return cls(pairs)

    def class_of(self, code: LanguageCode | str) -> frozenset[str]:
        canonical = code.canonical() if isinstance(code, LanguageCode) else \
            parse_language_code(code).canonical()
        return self._class_of.get(canonical, frozenset({canonical}))

    def representative(self, code: LanguageCode | str) -> str:
        """Stable class representative: the standard code if the class has
        one, otherwise the lowest canonical tag."""
        cls = self.class_of(code)
        non_extension = sorted(t for t in cls if not t.startswith("x-"))
        if non_extension:
            return non_extension[0]
        return sorted(cls)[0]


def _read_vocab_lines(path: str | Path) -> tuple[str, list[VocabTerm]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    body = [l for l in lines if l.strip() and not l.startswith("#")]
    if not body or not body[0].startswith("vocab "):
        raise VocabularyParseError(f"{path}: missing 'vocab <id>' header line")
    vocab_id = body[0][len("vocab "):].strip()
    if not vocab_id:
        raise VocabularyParseError(f"{path}: empty vocabulary id")
    terms = []
    for line in body[1:]:
        parts = line.split("\t")
        if len(parts) != 2:
            raise VocabularyParseError(
                f"{path}: expected 'code<TAB>label', got {line!r}"
            )
        terms.append(VocabTerm(code=parts[0].strip(), label=parts[1].strip()))
    return vocab_id, terms


class VocabularyRegistry:
    """All vocabulary knowledge in one place.

    Holds the accepted vocabularies, any third-party extensions, the known
    language-code table (tag to display name), the alias table, and the
    code-equivalence classes.
    """

    def __init__(
        self,
        vocabularies: Iterable[Vocabulary] = (),
        language_names: Optional[dict[str, str]] = None,
        aliases: Optional[AliasTable] = None,
        equivalences: Optional[CodeEquivalences] = None,
    ):
        self._vocabs: dict[str, Vocabulary] = {}
        for vocab in vocabularies:
            self._vocabs[vocab.id] = vocab
        self._language_names = dict(language_names or {})
        self.aliases = aliases if aliases is not None else AliasTable()
        self.equivalences = equivalences if equivalences is not None else CodeEquivalences()

    # -- vocabularies ------------------------------------------------------

    def vocabulary(self, vocab_id: str) -> Vocabulary:
        try:
            return self._vocabs[vocab_id]
        except KeyError:
            raise UnknownVocabulary(f"no vocabulary registered under {vocab_id!r}") from None

    def has_vocabulary(self, vocab_id: str) -> bool:
        return vocab_id in self._vocabs

    def status_of(self, vocab_id: str) -> Optional[str]:
        vocab = self._vocabs.get(vocab_id)
        return vocab.status if vocab else None

    def lookup_term(self, vocab_id: str, code: str) -> VocabTerm:
        """Canonical term for `code`, or TermNotFound / UnknownVocabulary.

        TermNotFound against a third-party vocabulary is a warning-level
        condition for callers; the distinction is carried by `status_of`.
        """
        if vocab_id == "language":
            parsed = parse_language_code(code)
            name = self.language_name(parsed)
            if name is None:
                raise TermNotFound(f"unknown language code {code!r}")
            return VocabTerm(code=parsed.canonical(), label=name)
        return self.vocabulary(vocab_id).lookup(code)

    def register_extension(self, path: str | Path) -> Vocabulary:
        """Register a third-party vocabulary from a definition file.

        Colliding with an accepted vocabulary (or the language scheme) is an
        error; re-registering a third-party id replaces the old definition,
        keeping the extension mechanism open for revisions.
        """
        vocab_id, terms = _read_vocab_lines(path)
        existing = self._vocabs.get(vocab_id)
        if (existing and existing.status == "accepted") or vocab_id == "language":
            raise DuplicateVocabulary(
                f"{vocab_id!r} is an accepted vocabulary and cannot be redefined"
            )
        vocab = Vocabulary(vocab_id, terms, status="third-party")
        self._vocabs[vocab_id] = vocab
        return vocab

    # -- language codes ----------------------------------------------------

    def knows_language(self, code: LanguageCode | str) -> bool:
        canonical = code.canonical() if isinstance(code, LanguageCode) else \
            parse_language_code(code).canonical()
        return canonical in self._language_names

    def language_name(self, code: LanguageCode | str) -> Optional[str]:
        canonical = code.canonical() if isinstance(code, LanguageCode) else \
            parse_language_code(code).canonical()
        return self._language_names.get(canonical)

    def resolved_language_name(self, code: LanguageCode | str) -> Optional[str]:
        """Display name for a code, searching its whole equivalence class."""
        canonical = code.canonical() if isinstance(code, LanguageCode) else \
            parse_language_code(code).canonical()
        for member in sorted(self.equivalences.class_of(canonical)):
            name = self._language_names.get(member)
            if name is not None:
                return name
        return None

    def language_label(self, code: LanguageCode | str) -> str:
        """Display name for a code, falling back to the canonical tag."""
        name = self.resolved_language_name(code)
        if name is not None:
            return name
        return code.canonical() if isinstance(code, LanguageCode) else \
            parse_language_code(code).canonical()


def lookup_term(vocab_id: str, code: str, registry: Optional[VocabularyRegistry] = None) -> VocabTerm:
    """Functional form of :meth:`VocabularyRegistry.lookup_term`."""
    return (registry or default_registry()).lookup_term(vocab_id, code)


def register_extension_vocab(path: str | Path, registry: Optional[VocabularyRegistry] = None) -> Vocabulary:
    """Functional form of :meth:`VocabularyRegistry.register_extension`."""
    return (registry or default_registry()).register_extension(path)


def _data_path(filename: str):
    return resources.as_file(resources.files("olacat.data").joinpath(filename))


def load_language_names(path: str | Path) -> dict[str, str]:
    """Load the `tag<TAB>name` known-code table, keyed by canonical tag."""
    names: dict[str, str] = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise VocabularyParseError(
                f"{path}:{lineno}: expected 'tag<TAB>name', got {line!r}"
            )
        names[parse_language_code(parts[0].strip()).canonical()] = parts[1].strip()
    return names


def build_registry(
    vocab_files: Iterable[str | Path],
    language_codes_file: str | Path,
    alias_file: str | Path,
    equivalence_file: str | Path,
    extension_files: Iterable[str | Path] = (),
) -> VocabularyRegistry:
    """Assemble a registry from data files (accepted vocabularies first)."""
    vocabularies = []
    for path in vocab_files:
        vocab_id, terms = _read_vocab_lines(path)
        vocabularies.append(Vocabulary(vocab_id, terms, status="accepted"))
    registry = VocabularyRegistry(
        vocabularies,
        language_names=load_language_names(language_codes_file),
        aliases=AliasTable.from_file(alias_file),
        equivalences=CodeEquivalences.from_file(equivalence_file),
    )
    for path in extension_files:
        registry.register_extension(path)
    return registry


def load_packaged_registry() -> VocabularyRegistry:
    """A fresh registry over the packaged data files."""
    with _data_path("vocab-role.tsv") as role, \
            _data_path("vocab-linguistic-type.tsv") as ltype, \
            _data_path("vocab-discourse-type.tsv") as dtype, \
            _data_path("vocab-linguistic-field.tsv") as lfield, \
            _data_path("language-codes.tsv") as codes, \
            _data_path("aliases.tsv") as aliases, \
            _data_path("equivalences.tsv") as equiv:
        return build_registry([role, ltype, dtype, lfield], codes, aliases, equiv)


_default_registry: Optional[VocabularyRegistry] = None


def default_registry() -> VocabularyRegistry:
    """Registry over the packaged data files, built once per process."""
    global _default_registry
    if _default_registry is None:
        _default_registry = load_packaged_registry()
    return _default_registry
