"""Clinical data-dictionary ingestion and retrieval-query rendering.

Dictionaries arrive as delimited tables with a header row.  Column names and
the delimiter are configurable; the defaults match the common
dataset_name / field_name / field_description layout, with an optional
code_values column holding semicolon-separated ``code=meaning`` pairs.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import (
    DuplicateKeyError,
    EmptyFieldNameError,
    MissingColumnError,
    MixedDatasetError,
)

DEFAULT_DATASET_COLUMN = "dataset_name"
DEFAULT_FIELD_COLUMN = "field_name"
DEFAULT_DESCRIPTION_COLUMN = "field_description"
DEFAULT_CODES_COLUMN = "code_values"


@dataclass(frozen=True)
class DictionaryEntry:
    """One raw clinical field: the unit of mapping input."""

    dataset_name: str
    field_name: str
    field_description: str = ""
    code_values: tuple[tuple[str, str], ...] | None = None

    def __post_init__(self):
        if not self.field_name.strip():
            raise ValueError("field_name must be non-empty")

    @property
    def key(self) -> tuple[str, str]:
        return (self.dataset_name, self.field_name)


@dataclass(frozen=True)
class DataDictionary:
    """All entries of one dataset, in source-file order."""

    dataset_name: str
    entries: tuple[DictionaryEntry, ...]

    def __post_init__(self):
        for entry in self.entries:
            if entry.dataset_name != self.dataset_name:
                raise ValueError(
                    f"entry {entry.key} does not belong to dataset {self.dataset_name!r}"
                )


def _parse_codes(cell: str) -> tuple[tuple[str, str], ...] | None:
    if not cell:
        return None
    pairs = []
    for part in cell.split(";"):
        part = part.strip()
        if not part:
            continue
        code, _, meaning = part.partition("=")
        pairs.append((code.strip(), meaning.strip()))
    return tuple(pairs) or None


def _render_codes(codes: tuple[tuple[str, str], ...] | None) -> str:
    if not codes:
        return ""
    return "; ".join(f"{code}={meaning}" for code, meaning in codes)


def parse_dictionary(
    content: str,
    *,
    delimiter: str = ",",
    dataset_column: str = DEFAULT_DATASET_COLUMN,
    field_column: str = DEFAULT_FIELD_COLUMN,
    description_column: str = DEFAULT_DESCRIPTION_COLUMN,
    codes_column: str = DEFAULT_CODES_COLUMN,
    dataset_name: str | None = None,
) -> DataDictionary:
    """Parse delimited-table text into a DataDictionary.

    The header row must name the dataset, field and description columns
    (names configurable above); the codes column is optional.  Cell
    whitespace is trimmed.  A blank field name is a hard error reported
    with its row number; a repeated (dataset, field) key is an error naming
    the offending row; rows whose dataset differs from the first row's are
    rejected.  Fully blank rows are skipped.

    ``dataset_name`` pins the expected dataset (useful for header-only
    files, which otherwise produce an empty dictionary with dataset "").
    """
    rows = list(csv.reader(io.StringIO(content), delimiter=delimiter))
    if not rows:
        raise MissingColumnError("input has no header row")
    header = [cell.strip() for cell in rows[0]]
    positions = {name: index for index, name in enumerate(header)}
    for required in (dataset_column, field_column, description_column):
        if required not in positions:
            raise MissingColumnError(f"required column {required!r} not in header {header}")
    codes_at = positions.get(codes_column)

    def cell(row: list[str], index: int) -> str:
        return row[index].strip() if index < len(row) else ""

    entries: list[DictionaryEntry] = []
    seen: set[tuple[str, str]] = set()
    for row_number, row in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in row):
            continue
        field = cell(row, positions[field_column])
        if not field:
            raise EmptyFieldNameError(f"row {row_number}: blank field name")
        dataset = cell(row, positions[dataset_column])
        if dataset_name is None:
            dataset_name = dataset
        elif dataset != dataset_name:
            raise MixedDatasetError(
                f"row {row_number}: dataset {dataset!r} differs from {dataset_name!r}"
            )
        key = (dataset, field)
        if key in seen:
            raise DuplicateKeyError(f"row {row_number}: duplicate entry {key}")
        seen.add(key)
        codes = _parse_codes(cell(row, codes_at)) if codes_at is not None else None
        entries.append(
            DictionaryEntry(dataset, field, cell(row, positions[description_column]), codes)
        )
    return DataDictionary(dataset_name or "", tuple(entries))


def render_dictionary(
    dictionary: DataDictionary,
    *,
    delimiter: str = ",",
    dataset_column: str = DEFAULT_DATASET_COLUMN,
    field_column: str = DEFAULT_FIELD_COLUMN,
    description_column: str = DEFAULT_DESCRIPTION_COLUMN,
    codes_column: str = DEFAULT_CODES_COLUMN,
) -> str:
    """Serialize a dictionary back to delimited-table text (parse round-trips it)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
    writer.writerow([dataset_column, field_column, description_column, codes_column])
    for entry in dictionary.entries:
        writer.writerow(
            [
                entry.dataset_name,
                entry.field_name,
                entry.field_description,
                _render_codes(entry.code_values),
            ]
        )
    return buffer.getvalue()


def entry_to_query(entry: DictionaryEntry, *, include_codes: bool = True) -> str:
    """Render one entry as deterministic retrieval-query text.

    Pure: equal entries give byte-equal output.  The description line is
    omitted when the description is blank; coded values render as
    ``code=meaning`` pairs and can be switched off.
    """
    lines = [f"Dataset: {entry.dataset_name}", f"Field name: {entry.field_name}"]
    if entry.field_description:
        lines.append(f"Description: {entry.field_description}")
    if include_codes and entry.code_values:
        lines.append(f"Coded values: {_render_codes(entry.code_values)}")
    return "\n".join(lines)
