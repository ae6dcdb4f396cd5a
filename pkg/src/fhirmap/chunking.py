"""Recursive character text splitting with bounded chunk size and overlap carry.

The splitter works in two phases:

1. *Pieces.*  The document is cut into atomic pieces that tile it exactly.
   The first separator that occurs in an oversized span cuts it (each
   separator stays attached to the end of the fragment it terminates);
   fragments still longer than the chunk size are cut again with the next
   separator.  Character-level splitting is the implicit final fallback, so
   no piece ever exceeds the chunk size.
2. *Merge.*  Pieces are greedily packed into chunks of at most chunk_size
   characters.  After a chunk is emitted, the next chunk starts early enough
   to re-include the last chunk_overlap characters of it, reduced only when
   the following piece would not fit otherwise.

Every chunk is a contiguous span of the source document, so its text always
equals the source substring at its span, and consecutive spans overlap or
touch - never leave gaps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import BadParamsError

DEFAULT_SEPARATORS: tuple[str, ...] = ("\n\n", "\n", " ", "")


@dataclass(frozen=True)
class Chunk:
    """A bounded fragment of one source document."""

    chunk_id: str
    doc_id: str
    text: str
    start: int
    end: int


def _piece_ends(text: str, start: int, end: int, level: int, separators: Sequence[str], chunk_size: int) -> list[int]:
    """End positions of atomic pieces tiling text[start:end], each piece <= chunk_size."""
    if end - start <= chunk_size:
        return [end]
    separator = separators[level] if level < len(separators) else ""
    if separator == "":
        return list(range(start + 1, end + 1))
    cuts = []
    position = start
    while True:
        hit = text.find(separator, position, end)
        if hit == -1:
            break
        cut = hit + len(separator)
        if cut < end:
            cuts.append(cut)
        position = cut
    if not cuts:
        return _piece_ends(text, start, end, level + 1, separators, chunk_size)
    ends: list[int] = []
    fragment_start = start
    for cut in cuts + [end]:
        if cut - fragment_start <= chunk_size:
            ends.append(cut)
        else:
            ends.extend(_piece_ends(text, fragment_start, cut, level + 1, separators, chunk_size))
        fragment_start = cut
    return ends


def _merge_spans(ends: list[int], chunk_size: int, chunk_overlap: int) -> list[tuple[int, int]]:
    spans: list[tuple[int, int]] = []
    count = len(ends)
    index = 0
    chunk_start = 0
    while index < count:
        scan = index
        while scan < count and ends[scan] - chunk_start <= chunk_size:
            scan += 1
        # scan > index always: the carry below is capped at chunk_size minus the
        # next piece's length, so at least one piece fits from chunk_start.
        spans.append((chunk_start, ends[scan - 1]))
        if scan >= count:
            break
        piece_length = ends[scan] - ends[scan - 1]
        carry = min(chunk_overlap, chunk_size - piece_length)
        chunk_start = ends[scan - 1] - carry
        index = scan
    return spans


def split_text(
    text: str,
    *,
    chunk_size: int = 2000,
    chunk_overlap: int = 200,
    separators: Sequence[str] = DEFAULT_SEPARATORS,
    doc_id: str = "doc",
) -> list[Chunk]:
    """Split a document into overlapping chunks of at most chunk_size characters.

    Raises BadParamsError for a non-positive chunk size, a negative overlap,
    an overlap >= chunk_size, or an empty separator list.  Empty input yields
    no chunks; input that already fits yields a single chunk equal to it.
    """
    if chunk_size <= 0:
        raise BadParamsError(f"chunk_size must be positive, got {chunk_size}")
    if chunk_overlap < 0:
        raise BadParamsError(f"chunk_overlap must be non-negative, got {chunk_overlap}")
    if chunk_overlap >= chunk_size:
        raise BadParamsError(
            f"chunk_overlap ({chunk_overlap}) must be smaller than chunk_size ({chunk_size})"
        )
    if not separators:
        raise BadParamsError("separators must be non-empty")
    if not text:
        return []
    ends = _piece_ends(text, 0, len(text), 0, list(separators), chunk_size)
    return [
        Chunk(f"{doc_id}:{start}-{end}", doc_id, text[start:end], start, end)
        for start, end in _merge_spans(ends, chunk_size, chunk_overlap)
    ]
