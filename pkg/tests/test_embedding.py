from __future__ import annotations

import numpy as np
import pytest

from fhirmap import EmbeddingCache, HashedTrigramEmbedder, embed_texts, normalize_rows
from fhirmap.embedding import RemoteHttpEmbedder, content_digest
from fhirmap.errors import DimensionMismatchError, EmbedderUnavailableError, EmbeddingError


def test_identical_texts_get_identical_vectors():
    embedder = HashedTrigramEmbedder(64)
    vectors = embed_texts(["same text", "same text"], embedder)
    assert np.array_equal(vectors[0], vectors[1])


def test_vectors_are_unit_norm_with_configured_dimension():
    embedder = HashedTrigramEmbedder(128)
    vectors = embed_texts(["alpha", "a", "some longer clinical field description"], embedder)
    assert vectors.shape == (3, 128)
    assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0, atol=1e-6)


def test_batch_preserves_input_order():
    embedder = HashedTrigramEmbedder(32)
    texts = ["one", "two", "three"]
    batched = embed_texts(texts, embedder)
    singles = [embed_texts([t], HashedTrigramEmbedder(32))[0] for t in texts]
    for row, single in zip(batched, singles):
        assert np.array_equal(row, single)


def test_empty_text_rejected():
    with pytest.raises(EmbeddingError):
        embed_texts([""], HashedTrigramEmbedder(16))


def test_embedding_is_deterministic_across_instances():
    a = embed_texts(["brain-stem"], HashedTrigramEmbedder(256))
    b = embed_texts(["brain-stem"], HashedTrigramEmbedder(256))
    assert np.array_equal(a, b)


def test_cache_avoids_second_invocation():
    embedder = HashedTrigramEmbedder(64)
    cache = EmbeddingCache()
    first = embed_texts(["x", "y"], embedder, cache)
    assert embedder.calls == 1
    second = embed_texts(["x", "y"], embedder, cache)
    assert embedder.calls == 1  # zero further invocations
    assert np.array_equal(first, second)


def test_repeated_texts_embedded_once_within_batch():
    embedder = HashedTrigramEmbedder(64)
    counting = []
    original = embedder.embed_batch

    def tracking(texts):
        counting.append(list(texts))
        return original(texts)

    embedder.embed_batch = tracking
    embed_texts(["a1", "a1", "b2", "a1"], embedder, EmbeddingCache())
    assert counting == [["a1", "b2"]]


def test_cache_persists_on_disk(tmp_path):
    path = tmp_path / "cache" / "embeddings.jsonl"
    embedder = HashedTrigramEmbedder(48)
    first = embed_texts(["persist me"], embedder, EmbeddingCache(path))
    reloaded = EmbeddingCache(path)
    assert reloaded.get(content_digest("persist me", embedder.name)) is not None
    fresh_embedder = HashedTrigramEmbedder(48)
    second = embed_texts(["persist me"], fresh_embedder, reloaded)
    assert fresh_embedder.calls == 0
    assert np.array_equal(first, second)


def test_cache_hit_and_miss_counters():
    cache = EmbeddingCache()
    embed_texts(["a", "b"], HashedTrigramEmbedder(16), cache)
    assert (cache.hits, cache.misses) == (0, 2)
    embed_texts(["a", "b"], HashedTrigramEmbedder(16), cache)
    assert (cache.hits, cache.misses) == (2, 2)


def test_dimension_mismatch_detected():
    class BrokenEmbedder:
        dimension = 8
        name = "broken"
        calls = 0

        def embed_batch(self, texts):
            return [[1.0, 2.0]] * len(texts)

    with pytest.raises(DimensionMismatchError):
        embed_texts(["a"], BrokenEmbedder())


def test_normalize_rejects_zero_vector():
    with pytest.raises(EmbeddingError):
        normalize_rows(np.array([[0.0, 0.0]]))


def test_empty_input_gives_empty_matrix():
    vectors = embed_texts([], HashedTrigramEmbedder(32))
    assert vectors.shape == (0, 32)


# --- remote embedder over a fake transport ---

class FakeResponse:
    def __init__(self, status_code, body=None, text=""):
        self.status_code = status_code
        self._body = body
        self.text = text

    def json(self):
        return self._body


class FakeSession:
    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append({"url": url, "json": json, "headers": headers})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def _ok_body(vectors):
    return {"data": [{"index": i, "embedding": v} for i, v in enumerate(vectors)]}


def test_remote_embedder_payload_shape_and_parse():
    session = FakeSession([FakeResponse(200, _ok_body([[3.0, 4.0]]))])
    embedder = RemoteHttpEmbedder("http://embed.test/v1/embeddings", "ada", 2, session=session)
    vectors = embed_texts(["hello"], embedder)
    sent = session.requests[0]["json"]
    assert sent == {"model": "ada", "input": ["hello"]}
    assert np.allclose(vectors[0], [0.6, 0.8])


def test_remote_embedder_retries_transient_and_succeeds():
    import requests

    session = FakeSession(
        [
            requests.ConnectionError("down"),
            FakeResponse(503),
            FakeResponse(200, _ok_body([[1.0, 0.0]])),
        ]
    )
    embedder = RemoteHttpEmbedder("http://e", "m", 2, session=session, backoff=0.0)
    assert embedder.embed_batch(["x"]) == [[1.0, 0.0]]
    assert len(session.requests) == 3


def test_remote_embedder_gives_up_after_attempts():
    session = FakeSession([FakeResponse(500)] * 3)
    embedder = RemoteHttpEmbedder("http://e", "m", 2, session=session, max_attempts=3, backoff=0.0)
    with pytest.raises(EmbedderUnavailableError, match="after 3 attempts"):
        embedder.embed_batch(["x"])


def test_remote_embedder_rejection_is_immediate():
    session = FakeSession([FakeResponse(401, text="bad token")])
    embedder = RemoteHttpEmbedder("http://e", "m", 2, session=session, backoff=0.0)
    with pytest.raises(EmbedderUnavailableError, match="401"):
        embedder.embed_batch(["x"])
    assert len(session.requests) == 1


def test_remote_embedder_sends_env_token(monkeypatch):
    monkeypatch.setenv("FHIRMAP_EMBEDDER_API_KEY", "sekret")
    session = FakeSession([FakeResponse(200, _ok_body([[1.0, 0.0]]))])
    RemoteHttpEmbedder("http://e", "m", 2, session=session).embed_batch(["x"])
    assert session.requests[0]["headers"]["Authorization"] == "Bearer sekret"
