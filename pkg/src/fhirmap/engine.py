"""Maps one dictionary field end to end.

The pipeline per entry is: render the retrieval query, embed it, fetch the
top-k chunks, build the prompt, invoke the generator, then parse and
validate the answer.  Every step's failure is recorded inside the
MappingResult; a batch never aborts because one entry failed.
"""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import FhirSchema, MappingPath, PathValidation, parse_path, validate_path
from .dictionary import DictionaryEntry, entry_to_query
from .embedding import Embedder, EmbeddingCache, embed_texts
from .errors import EmbeddingError, GenerationError, PathError
from .index import VectorIndex, search
from .llm import GenerationRequest, LlmClient, generate
from .prompting import ANSWER_SENTINEL, PromptTemplate, build_prompt, default_template

# a dotted path needs at least two blocks to be worth extracting from prose
_PATH_TOKEN = re.compile(r"[A-Za-z][A-Za-z0-9]*(?:\.[A-Za-z][A-Za-z0-9]*)+")


@dataclass(frozen=True)
class MappingResult:
    """Per-field outcome: raw generation text, parsed path or diagnostic, provenance."""

    entry_key: tuple[str, str]
    raw_response: str
    parsed_path: MappingPath | None
    parse_error: str | None
    validation: PathValidation | None
    retrieved_chunk_ids: tuple[str, ...]

    def __post_init__(self):
        if (self.parsed_path is None) == (self.parse_error is None):
            raise ValueError("exactly one of parsed_path / parse_error must be present")


@dataclass(frozen=True)
class EngineConfig:
    """Knobs for one mapping run; shared read-only across entries."""

    k: int = 20
    include_codes: bool = True
    temperature: float = 0.0
    max_output_tokens: int = 256
    model_name: str = "gpt-3.5-turbo"
    max_attempts: int = 3
    backoff: float = 0.5
    parallelism: int = 4
    template: PromptTemplate = field(default_factory=default_template)


def parse_response(raw: str) -> tuple[MappingPath | None, str | None]:
    """Extract a mapping path from generator output.

    Primary rule: the first line beginning with the answer sentinel is parsed
    as a path.  Fallback: the first dotted token with at least two blocks
    anywhere in the response.  Returns (path, None) on success, or
    (None, diagnostic) carrying the raw text when nothing parses.
    """
    for line in raw.splitlines():
        stripped = line.strip()
        if stripped.startswith(ANSWER_SENTINEL):
            try:
                return parse_path(stripped[len(ANSWER_SENTINEL):]), None
            except PathError:
                break
    token = _PATH_TOKEN.search(raw)
    if token:
        return parse_path(token.group()), None
    return None, f"no mapping path found in response: {raw!r}"


def map_entry(
    entry: DictionaryEntry,
    schema: FhirSchema,
    index: VectorIndex,
    embedder: Embedder,
    client: LlmClient,
    config: EngineConfig,
    cache: EmbeddingCache | None = None,
) -> MappingResult:
    """Map one entry; embedding or generation failures become entry-level results."""
    query = entry_to_query(entry, include_codes=config.include_codes)
    try:
        query_vector = embed_texts([query], embedder, cache)[0]
    except EmbeddingError as exc:
        return MappingResult(entry.key, "", None, f"embedding failed: {exc}", None, ())
    hits = search(index, query_vector, config.k)
    chunk_ids = tuple(hit.chunk_id for hit in hits)
    context = [index.text_by_chunk_id[hit.chunk_id] for hit in hits]
    prompt = build_prompt(config.template, context, entry, include_codes=config.include_codes)
    request = GenerationRequest(
        prompt, config.temperature, config.max_output_tokens, config.model_name
    )
    try:
        raw = generate(
            request, client, max_attempts=config.max_attempts, backoff=config.backoff
        )
    except GenerationError as exc:
        return MappingResult(
            entry.key, "", None, f"generation failed: {exc}", None, chunk_ids
        )
    path, error = parse_response(raw)
    validation = validate_path(path, schema) if path is not None else None
    return MappingResult(entry.key, raw, path, error, validation, chunk_ids)


def map_entries(
    entries: Sequence[DictionaryEntry],
    schema: FhirSchema,
    index: VectorIndex,
    embedder: Embedder,
    client: LlmClient,
    config: EngineConfig,
    cache: EmbeddingCache | None = None,
) -> dict[tuple[str, str], MappingResult]:
    """Map a batch concurrently under the configured parallelism bound.

    Results are keyed by entry key, so completion order is irrelevant.  An
    unexpected per-entry crash is isolated into that entry's result.
    """

    def run_one(entry: DictionaryEntry) -> MappingResult:
        try:
            return map_entry(entry, schema, index, embedder, client, config, cache)
        except Exception as exc:  # crash isolation: one entry must not sink the batch
            return MappingResult(entry.key, "", None, f"internal failure: {exc}", None, ())

    if config.parallelism <= 1 or len(entries) <= 1:
        results = [run_one(entry) for entry in entries]
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(run_one, entries))
    return {result.entry_key: result for result in results}
