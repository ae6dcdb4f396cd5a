"""FHIR documentation corpus, the dotted mapping-path grammar, and path validation.

The corpus is a stream of resource/element/description records (one JSON object
per line).  Each record becomes one retrievable document; the set of resource
names doubles as the vocabulary against which predicted paths are checked.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .errors import BadBlockError, EmptyCorpusError, EmptyPathError, MalformedRecordError

_IDENTIFIER = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


@dataclass(frozen=True)
class MappingPath:
    """An ordered sequence of dot-separated blocks; the first block names the resource."""

    blocks: tuple[str, ...]

    def __post_init__(self):
        if not self.blocks:
            raise EmptyPathError("a mapping path needs at least one block")
        for position, block in enumerate(self.blocks, start=1):
            if not _IDENTIFIER.match(block):
                raise BadBlockError(block, position)

    @property
    def resource(self) -> str:
        return self.blocks[0]

    def __str__(self) -> str:
        return ".".join(self.blocks)


def parse_path(text: str) -> MappingPath:
    """Parse raw text into a MappingPath.

    Splits on ``.`` and checks every block against the identifier grammar
    (a letter followed by letters or digits).  Raises EmptyPathError for
    blank input and BadBlockError naming the offending block and its
    1-based position.
    """
    stripped = text.strip()
    if not stripped:
        raise EmptyPathError("empty path text")
    return MappingPath(tuple(stripped.split(".")))


@dataclass(frozen=True)
class ElementDoc:
    """One resource-element pair with its documentation text.

    element_path is empty for resource-level documentation.
    """

    resource_name: str
    element_path: str
    description: str


@dataclass(frozen=True)
class FhirSchema:
    """Immutable view of the corpus: resource vocabulary plus element docs."""

    resources: frozenset[str]
    element_docs: tuple[ElementDoc, ...]
    version_label: str = "unspecified"

    @cached_property
    def _elements_by_resource(self) -> dict[str, frozenset[str]]:
        by_resource: dict[str, set[str]] = {}
        for doc in self.element_docs:
            by_resource.setdefault(doc.resource_name, set()).add(doc.element_path)
        return {name: frozenset(paths) for name, paths in by_resource.items()}

    def element_paths_for(self, resource_name: str) -> frozenset[str]:
        return self._elements_by_resource.get(resource_name, frozenset())


@dataclass(frozen=True)
class PathValidation:
    """Outcome of checking a predicted path against the schema.

    resource_known is the strict check; element_known is lenient (extension
    and choice-type paths legitimately fall outside the element list, so a
    False here is a warning, never an error).
    """

    resource_known: bool
    element_known: bool


def load_corpus_records(records: Iterable[Mapping], version_label: str = "unspecified") -> FhirSchema:
    """Build a FhirSchema from an iterable of resource/element/description mappings."""
    docs: list[ElementDoc] = []
    resources: set[str] = set()
    for index, record in enumerate(records, start=1):
        try:
            resource = str(record["resource"]).strip()
            element = str(record.get("element", "") or "").strip()
            description = str(record["description"]).strip()
        except (KeyError, TypeError) as exc:
            raise MalformedRecordError(f"record {index}: missing field {exc}") from exc
        if not resource or not _IDENTIFIER.match(resource):
            raise MalformedRecordError(f"record {index}: bad resource name {resource!r}")
        if not description:
            raise MalformedRecordError(f"record {index}: blank description")
        resources.add(resource)
        docs.append(ElementDoc(resource, element, description))
    if not docs:
        raise EmptyCorpusError("corpus contains no records")
    return FhirSchema(frozenset(resources), tuple(docs), version_label)


def load_corpus(text: str, version_label: str = "unspecified") -> FhirSchema:
    """Parse newline-delimited JSON records into a FhirSchema.

    Blank lines are skipped; every other line must be a JSON object with
    resource, element and description fields.
    """

    def records():
        for line_number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(f"line {line_number}: not valid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise MalformedRecordError(f"line {line_number}: record is not an object")
            yield record

    return load_corpus_records(records(), version_label)


def render_documents(schema: FhirSchema) -> list[tuple[str, str]]:
    """Render every element doc as one (doc_id, document text) pair.

    doc_ids derive from resource + element path and are stable across runs;
    repeated resource/element records get a ``#n`` suffix to stay unique.
    """
    out: list[tuple[str, str]] = []
    seen: dict[str, int] = {}
    for doc in schema.element_docs:
        dotted = f"{doc.resource_name}.{doc.element_path}" if doc.element_path else doc.resource_name
        count = seen.get(dotted, 0) + 1
        seen[dotted] = count
        doc_id = dotted if count == 1 else f"{dotted}#{count}"
        text = f"Resource: {doc.resource_name}\nElement: {dotted}\nDescription: {doc.description}"
        out.append((doc_id, text))
    return out


def validate_path(path: MappingPath, schema: FhirSchema) -> PathValidation:
    """Check a parsed path against the schema; reports flags, never raises."""
    resource_known = path.resource in schema.resources
    element_known = False
    if resource_known:
        tail = ".".join(path.blocks[1:])
        element_known = tail in schema.element_paths_for(path.resource)
    return PathValidation(resource_known, element_known)
