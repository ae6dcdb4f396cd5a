"""Exact top-k cosine-similarity search over an in-memory vector index.

The index is a flat matrix of unit-norm vectors plus the chunks they came
from.  Similarity is the plain dot product (cosine for unit vectors); ties
break toward earlier insertion.  Persistence is a three-file directory:
chunk metadata as JSONL, vectors as a binary .npy array, and a manifest
carrying dimension, count and content digests, so a saved index reloads
bit-identically.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .chunking import Chunk
from .errors import CountMismatchError, DimensionMismatchError, DuplicateChunkIdError

CHUNKS_FILE = "chunks.jsonl"
VECTORS_FILE = "vectors.npy"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class RetrievalHit:
    chunk_id: str
    similarity: float
    rank: int


# eq=False: ndarray fields do not support elementwise-free comparison
@dataclass(frozen=True, eq=False)
class VectorIndex:
    chunks: tuple[Chunk, ...]
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    @cached_property
    def text_by_chunk_id(self) -> dict[str, str]:
        return {chunk.chunk_id: chunk.text for chunk in self.chunks}

    def digest(self) -> str:
        """Content digest over vectors and chunk metadata; stable across runs."""
        hasher = hashlib.sha256()
        hasher.update(np.ascontiguousarray(self.vectors).tobytes())
        for chunk in self.chunks:
            hasher.update(
                json.dumps(
                    [chunk.chunk_id, chunk.doc_id, chunk.text, chunk.start, chunk.end]
                ).encode("utf-8")
            )
        return hasher.hexdigest()


def build_index(chunks: Sequence[Chunk], vectors) -> VectorIndex:
    """Assemble an index from parallel chunk and vector lists.

    Counts must match, chunk ids must be unique, and all vectors must share
    one dimension.  Zero chunks produce an empty, searchable index.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.size == 0:
        vectors = vectors.reshape(0, vectors.shape[1] if vectors.ndim == 2 else 0)
    if vectors.ndim != 2:
        raise DimensionMismatchError(f"vectors must be a 2-d array, got shape {vectors.shape}")
    if len(chunks) != vectors.shape[0]:
        raise CountMismatchError(f"{len(chunks)} chunks but {vectors.shape[0]} vectors")
    ids = [chunk.chunk_id for chunk in chunks]
    if len(set(ids)) != len(ids):
        duplicates = sorted({cid for cid in ids if ids.count(cid) > 1})
        raise DuplicateChunkIdError(f"duplicate chunk ids: {duplicates}")
    return VectorIndex(tuple(chunks), vectors)


def search(index: VectorIndex, query, k: int) -> list[RetrievalHit]:
    """Return the min(k, len(index)) most similar chunks, best first.

    Similarity is the dot product of unit vectors.  Equal similarities rank
    in insertion order.  Raises DimensionMismatchError when the query width
    does not match the index.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if len(index) == 0:
        return []
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (index.dimension,):
        raise DimensionMismatchError(
            f"query shape {query.shape} does not match index dimension {index.dimension}"
        )
    similarities = index.vectors @ query
    order = np.argsort(-similarities, kind="stable")[:k]
    return [
        RetrievalHit(index.chunks[i].chunk_id, float(similarities[i]), rank)
        for rank, i in enumerate(order, start=1)
    ]


def save_index(index: VectorIndex, directory: str | Path) -> str:
    """Persist the index into a directory; returns its content digest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / CHUNKS_FILE).open("w", encoding="utf-8") as handle:
        for chunk in index.chunks:
            handle.write(
                json.dumps(
                    {
                        "chunk_id": chunk.chunk_id,
                        "doc_id": chunk.doc_id,
                        "text": chunk.text,
                        "start": chunk.start,
                        "end": chunk.end,
                    }
                )
                + "\n"
            )
    np.save(directory / VECTORS_FILE, index.vectors)
    digest = index.digest()
    manifest = {
        "dimension": index.dimension,
        "count": len(index),
        "digest": digest,
    }
    (directory / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return digest


def load_index(directory: str | Path) -> VectorIndex:
    """Reload a persisted index, verifying manifest count, dimension and digest."""
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST_FILE).read_text(encoding="utf-8"))
    chunks = []
    for line in (directory / CHUNKS_FILE).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        chunks.append(
            Chunk(
                record["chunk_id"],
                record["doc_id"],
                record["text"],
                record["start"],
                record["end"],
            )
        )
    vectors = np.load(directory / VECTORS_FILE)
    index = build_index(chunks, vectors)
    if len(index) != manifest["count"] or (len(index) and index.dimension != manifest["dimension"]):
        raise CountMismatchError(
            f"index at {directory} does not match its manifest "
            f"(count {len(index)} vs {manifest['count']})"
        )
    if index.digest() != manifest["digest"]:
        raise CountMismatchError(f"index at {directory} fails its digest check")
    return index
