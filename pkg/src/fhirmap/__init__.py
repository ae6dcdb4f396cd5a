"""Retrieval-augmented mapping of clinical data-dictionary fields to FHIR paths."""

from .chunking import Chunk, split_text
from .corpus import (
    ElementDoc,
    FhirSchema,
    MappingPath,
    PathValidation,
    load_corpus,
    load_corpus_records,
    parse_path,
    render_documents,
    validate_path,
)
from .dictionary import (
    DataDictionary,
    DictionaryEntry,
    entry_to_query,
    parse_dictionary,
    render_dictionary,
)
from .embedding import (
    EmbeddingCache,
    HashedTrigramEmbedder,
    RemoteHttpEmbedder,
    embed_texts,
    normalize_rows,
)
from .engine import EngineConfig, MappingResult, map_entries, map_entry, parse_response
from .evaluation import (
    DatasetScore,
    EvaluationPair,
    MatchClass,
    RunAggregate,
    ScoreStats,
    aggregate,
    classify,
    partial_credit,
    pool_scores,
    score_dataset,
)
from .index import RetrievalHit, VectorIndex, build_index, load_index, save_index, search
from .llm import GenerationRequest, MockLlmClient, RemoteChatClient, generate
from .prompting import PromptTemplate, build_prompt, default_template

__version__ = "0.1.0"

__all__ = [
    "Chunk",
    "DataDictionary",
    "DatasetScore",
    "DictionaryEntry",
    "ElementDoc",
    "EmbeddingCache",
    "EngineConfig",
    "EvaluationPair",
    "FhirSchema",
    "GenerationRequest",
    "HashedTrigramEmbedder",
    "MappingPath",
    "MappingResult",
    "MatchClass",
    "MockLlmClient",
    "PathValidation",
    "PromptTemplate",
    "RemoteChatClient",
    "RemoteHttpEmbedder",
    "RetrievalHit",
    "RunAggregate",
    "ScoreStats",
    "VectorIndex",
    "aggregate",
    "build_index",
    "build_prompt",
    "classify",
    "default_template",
    "embed_texts",
    "entry_to_query",
    "generate",
    "load_corpus",
    "load_corpus_records",
    "load_index",
    "map_entries",
    "map_entry",
    "normalize_rows",
    "parse_dictionary",
    "parse_path",
    "parse_response",
    "partial_credit",
    "pool_scores",
    "render_dictionary",
    "render_documents",
    "save_index",
    "score_dataset",
    "search",
    "split_text",
    "validate_path",
]
