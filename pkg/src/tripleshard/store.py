"""In-memory triple store: parsing, serialization, CSV ingestion, and indexes.

The store keeps triples in first-occurrence order and treats the graph as a
set: exact duplicates are dropped on construction. Three hash indexes map
subjects, predicates, and resource objects to triple positions. Literal
objects are deliberately kept out of the object index so that a literal can
never be mistaken for a joinable node.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from typing import Iterable, Iterator


class ParseError(ValueError):
    """A statement line that does not match the triple grammar."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class IngestError(ValueError):
    """Tabular input that cannot be mapped onto triples."""


@dataclass(frozen=True, slots=True)
class Triple:
    subject: str
    predicate: str
    object: str
    object_is_literal: bool = False

    def __post_init__(self):
        if not self.subject:
            raise ValueError("triple subject must be a non-empty string")
        if not self.predicate:
            raise ValueError("triple predicate must be a non-empty string")

    def key(self) -> tuple[str, str, str, bool]:
        return (self.subject, self.predicate, self.object, self.object_is_literal)


class TripleStore:
    """Immutable, indexed collection of unique triples.

    Positions (0-based offsets into ``triples``) are the canonical way to
    refer to a triple; fragment and replica definitions elsewhere are sets of
    positions into this store.
    """

    __slots__ = ("triples", "subject_index", "object_index", "predicate_index")

    def __init__(self, triples: Iterable[Triple]):
        seen: set[tuple] = set()
        kept: list[Triple] = []
        for t in triples:
            k = t.key()
            if k in seen:
                continue
            seen.add(k)
            kept.append(t)
        self.triples: tuple[Triple, ...] = tuple(kept)

        subject_index: dict[str, list[int]] = {}
        predicate_index: dict[str, list[int]] = {}
        object_index: dict[str, list[int]] = {}
        for i, t in enumerate(self.triples):
            subject_index.setdefault(t.subject, []).append(i)
            predicate_index.setdefault(t.predicate, []).append(i)
            if not t.object_is_literal:
                object_index.setdefault(t.object, []).append(i)
        self.subject_index = subject_index
        self.predicate_index = predicate_index
        self.object_index = object_index

    @property
    def n(self) -> int:
        return len(self.triples)

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TripleStore):
            return NotImplemented
        return self.triples == other.triples

    def __repr__(self) -> str:
        return f"TripleStore(n={self.n}, subjects={len(self.subject_index)})"


_RESOURCE = r"<([^<>\s]+)>"
_LITERAL = r'"((?:[^"\\]|\\.)*)"'
_LINE_RE = re.compile(rf"^{_RESOURCE}\s+{_RESOURCE}\s+(?:{_RESOURCE}|{_LITERAL})\s*\.$")


def _unescape_literal(raw: str) -> str:
    return raw.replace('\\"', '"').replace("\\\\", "\\")


def _escape_literal(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def parse_ntriples(text: str) -> TripleStore:
    """Parse line-oriented triple statements into a store.

    Each statement is ``<s> <p> <o> .`` or ``<s> <p> "literal" .`` on one
    line. Blank lines and lines starting with ``#`` are ignored. Exact
    duplicate statements collapse to one triple. A malformed line raises
    :class:`ParseError` carrying the 1-based line number.
    """
    triples: list[Triple] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise ParseError(f"malformed statement: {line!r}", line_number)
        subject, predicate, resource_obj, literal_obj = m.groups()
        if resource_obj is not None:
            triples.append(Triple(subject, predicate, resource_obj, False))
        else:
            triples.append(Triple(subject, predicate, _unescape_literal(literal_obj), True))
    return TripleStore(triples)


def serialize_ntriples(store: TripleStore) -> str:
    """Render the store back to statement lines in store order.

    ``parse_ntriples(serialize_ntriples(s))`` reproduces ``s`` exactly, and
    equal stores serialize to byte-identical text.
    """
    lines = []
    for t in store.triples:
        if t.object_is_literal:
            lines.append(f'<{t.subject}> <{t.predicate}> "{_escape_literal(t.object)}" .')
        else:
            lines.append(f"<{t.subject}> <{t.predicate}> <{t.object}> .")
    return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class CsvMapping:
    """How to turn tabular rows into triples.

    ``subject_column`` names the column holding the subject identifier and
    ``properties`` pairs a predicate name with the column providing its
    object value. Columns listed in ``resource_columns`` yield resource
    objects; every other mapped object is a literal.
    """

    subject_column: str
    properties: tuple[tuple[str, str], ...]
    resource_columns: frozenset[str] = frozenset()


@dataclass
class CsvIngestResult:
    store: TripleStore
    skipped_cells: int


def ingest_csv(source: str | Iterable[str], mapping: CsvMapping) -> CsvIngestResult:
    """Convert header-bearing CSV rows into triples, one per mapped cell.

    Empty object cells are skipped and counted; a row with an empty subject
    cell skips all of its mapped cells. A mapped column missing from the
    header raises :class:`IngestError` naming the column.
    """
    if isinstance(source, str):
        source = source.splitlines()
    reader = csv.DictReader(source)
    header = reader.fieldnames or []
    needed = [mapping.subject_column] + [col for _, col in mapping.properties]
    for col in needed:
        if col not in header:
            raise IngestError(f"mapped column {col!r} not found in CSV header")

    triples: list[Triple] = []
    skipped = 0
    for row in reader:
        subject = (row.get(mapping.subject_column) or "").strip()
        if not subject:
            skipped += len(mapping.properties)
            continue
        for predicate, column in mapping.properties:
            value = (row.get(column) or "").strip()
            if not value:
                skipped += 1
                continue
            is_literal = column not in mapping.resource_columns
            triples.append(Triple(subject, predicate, value, is_literal))
    return CsvIngestResult(TripleStore(triples), skipped)
