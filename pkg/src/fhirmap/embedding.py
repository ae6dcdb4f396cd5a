"""Embedding backends, unit normalization, and a content-addressed cache.

Two backends implement the same contract: a fully offline hashed-trigram
embedder for deterministic runs and tests, and an HTTP client for any
service speaking the usual embeddings convention (model name + input list
in, list of embedding arrays out).  ``embed_texts`` is the single entry
point: it dedupes by content digest, consults the cache, batches the
misses, and returns unit-normalized vectors.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import zlib
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np
import requests

from .errors import DimensionMismatchError, EmbedderUnavailableError, EmbeddingError


@runtime_checkable
class Embedder(Protocol):
    """Contract for embedding backends."""

    dimension: int
    name: str
    calls: int

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        ...


class HashedTrigramEmbedder:
    """Deterministic offline embedder: hashed character-trigram counts, L2-normalized.

    Texts shorter than three characters hash as a single token; empty text is
    rejected because it would produce a zero vector.
    """

    def __init__(self, dimension: int = 256):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.name = f"hashed-trigram-{dimension}"
        self.calls = 0

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        self.calls += 1
        return [self._embed_one(text) for text in texts]

    def _embed_one(self, text: str) -> list[float]:
        if not text:
            raise EmbeddingError("cannot embed empty text")
        grams = [text[i : i + 3] for i in range(len(text) - 2)] or [text]
        values = [0.0] * self.dimension
        for gram in grams:
            values[zlib.crc32(gram.encode("utf-8")) % self.dimension] += 1.0
        norm = sum(v * v for v in values) ** 0.5
        return [v / norm for v in values]


class RemoteHttpEmbedder:
    """Client for an embeddings HTTP endpoint.

    Sends ``{"model": ..., "input": [...]}`` and expects
    ``{"data": [{"embedding": [...]}, ...]}``.  The bearer token is read
    from the environment (never from config files).  Transient failures
    (connection errors, 429, 5xx) are retried with exponential backoff.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int,
        *,
        api_key_env: str = "FHIRMAP_EMBEDDER_API_KEY",
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        session=None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.dimension = dimension
        self.name = f"remote:{model}"
        self.calls = 0
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff = backoff
        self._session = session or requests

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        self.calls += 1
        payload = {"model": self.model, "input": list(texts)}
        headers = {}
        token = os.environ.get(self.api_key_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self._session.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"status {response.status_code}"
                continue
            if response.status_code >= 400:
                raise EmbedderUnavailableError(
                    f"embedder rejected request with status {response.status_code}: {response.text[:200]}"
                )
            return self._parse(response.json(), len(texts))
        raise EmbedderUnavailableError(
            f"embedder unreachable after {self.max_attempts} attempts ({last_error})"
        )

    def _parse(self, body, expected: int) -> list[list[float]]:
        try:
            data = body["data"]
            if any("index" in item for item in data):
                data = sorted(data, key=lambda item: item.get("index", 0))
            vectors = [[float(v) for v in item["embedding"]] for item in data]
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbedderUnavailableError(f"malformed embedder response: {exc}") from exc
        if len(vectors) != expected:
            raise EmbedderUnavailableError(
                f"embedder returned {len(vectors)} vectors for {expected} inputs"
            )
        return vectors


def content_digest(text: str, namespace: str) -> str:
    """Stable cache key for one text under one embedder identity."""
    return hashlib.sha256(f"{namespace}\x00{text}".encode("utf-8")).hexdigest()


class EmbeddingCache:
    """Digest-keyed vector cache, optionally persisted as append-only JSONL.

    Safe for concurrent insert-or-get.  ``hits`` and ``misses`` count lookups
    so callers can report cache effectiveness.
    """

    def __init__(self, path: str | Path | None = None):
        self._store: dict[str, list[float]] = {}
        self._lock = threading.Lock()
        self._path = Path(path) if path is not None else None
        self.hits = 0
        self.misses = 0
        if self._path is not None and self._path.exists():
            for line in self._path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                self._store[record["key"]] = record["vector"]

    def __len__(self) -> int:
        return len(self._store)

    def get(self, key: str) -> list[float] | None:
        with self._lock:
            vector = self._store.get(key)
            if vector is None:
                self.misses += 1
            else:
                self.hits += 1
        return vector

    def put(self, key: str, vector: Sequence[float]) -> None:
        stored = [float(v) for v in vector]
        with self._lock:
            if key in self._store:
                return
            self._store[key] = stored
            if self._path is not None:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with self._path.open("a", encoding="utf-8") as handle:
                    handle.write(json.dumps({"key": key, "vector": stored}) + "\n")


def normalize_rows(vectors: np.ndarray) -> np.ndarray:
    """Scale each row to unit Euclidean norm; zero rows are rejected."""
    vectors = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0):
        raise EmbeddingError("zero vector cannot be normalized")
    return vectors / norms[:, None]


def embed_texts(
    texts: Sequence[str],
    embedder: Embedder,
    cache: EmbeddingCache | None = None,
) -> np.ndarray:
    """Embed texts in order, returning a (len(texts), dimension) float array.

    Repeated texts are embedded once; cached texts are not sent to the
    embedder at all (a fully cached call performs zero embedder
    invocations).  Vectors are unit-normalized before caching and return.
    Raises DimensionMismatchError if the embedder returns vectors of the
    wrong width.
    """
    results: list[list[float] | None] = [None] * len(texts)
    pending: dict[str, list[int]] = {}
    pending_texts: list[str] = []
    for position, text in enumerate(texts):
        key = content_digest(text, embedder.name)
        cached = cache.get(key) if cache is not None else None
        if cached is not None:
            results[position] = cached
        elif key in pending:
            pending[key].append(position)
        else:
            pending[key] = [position]
            pending_texts.append(text)
    if pending_texts:
        raw = embedder.embed_batch(pending_texts)
        if len(raw) != len(pending_texts):
            raise DimensionMismatchError(
                f"embedder returned {len(raw)} vectors for {len(pending_texts)} texts"
            )
        for vector in raw:
            if len(vector) != embedder.dimension:
                raise DimensionMismatchError(
                    f"embedder returned dimension {len(vector)}, expected {embedder.dimension}"
                )
        normalized = normalize_rows(np.asarray(raw, dtype=np.float64))
        for (key, positions), vector in zip(pending.items(), normalized):
            as_list = vector.tolist()
            if cache is not None:
                cache.put(key, as_list)
            for position in positions:
                results[position] = as_list
    if not texts:
        return np.empty((0, embedder.dimension), dtype=np.float64)
    return np.asarray(results, dtype=np.float64)
