"""End-to-end orchestration: corpus to index, mapping batches, scoring, reports.

Output layout under ``output_dir``:

* ``index/``                       persisted vector index (three files)
* ``cache/embeddings.jsonl``       on-disk embedding cache
* ``mappings/<dict>.iterNN.csv``   one mapping table per dictionary per iteration
* ``mappings/<dict>.iterNN.diagnostics.jsonl``  raw responses, chunk ids, flags
* ``scores.csv``                   per-dataset score table with a Total row
* ``report.txt``                   human-readable summary
* ``*_manifest.json``              per-command run manifests (config echo, digests)

With the local embedder and a mock generator every artifact except the
manifests (which carry timestamps) is byte-reproducible across runs.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .config import PipelineConfig
from .corpus import FhirSchema, load_corpus, parse_path, render_documents
from .chunking import split_text
from .dictionary import DataDictionary, entry_to_query, parse_dictionary
from .embedding import EmbeddingCache, HashedTrigramEmbedder, RemoteHttpEmbedder, embed_texts
from .engine import EngineConfig, MappingResult, map_entries
from .errors import ConfigError, EmptyDatasetError, JoinError, PathError
from .evaluation import (
    TOTAL_ROW,
    EvaluationPair,
    RunAggregate,
    aggregate,
    score_dataset,
)
from .index import VectorIndex, build_index, load_index, save_index
from .llm import MockLlmClient, RemoteChatClient
from .prompting import default_template

INDEX_DIR = "index"
CACHE_FILE = "cache/embeddings.jsonl"
MAPPINGS_DIR = "mappings"
SCORES_FILE = "scores.csv"
REPORT_FILE = "report.txt"

_ITER_FILE = re.compile(r"^(?P<stem>.+)\.iter(?P<iteration>\d+)\.csv$")

MAPPING_COLUMNS = ("dataset_name", "field_name", "fhir_mapping")
SCORE_COLUMNS = (
    "Dataset",
    "Score(%)",
    "Score stddev",
    "ResourceMatchScore(%)",
    "ResourceMatchScore stddev",
)


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(path: Path, payload: dict) -> None:
    payload = {"timestamp": datetime.now(timezone.utc).isoformat(), **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def make_embedder(config: PipelineConfig):
    settings = config.embedder
    if settings.mode == "local":
        return HashedTrigramEmbedder(settings.dimension)
    if not settings.endpoint:
        raise ConfigError("embedder.endpoint is required in remote mode")
    return RemoteHttpEmbedder(
        settings.endpoint,
        settings.model,
        settings.dimension,
        max_attempts=settings.retries,
        backoff=settings.backoff,
    )


def make_client(config: PipelineConfig):
    settings = config.generator
    if settings.mode == "mock":
        default = settings.mock_default_response or None
        if settings.mock_responses_path:
            return MockLlmClient.from_file(settings.mock_responses_path, default=default)
        if default is None:
            raise ConfigError(
                "generator.mock_responses_path or generator.mock_default_response is required in mock mode"
            )
        return MockLlmClient(default=default)
    if not settings.endpoint:
        raise ConfigError("generator.endpoint is required in remote mode")
    return RemoteChatClient(settings.endpoint)


def open_cache(config: PipelineConfig) -> EmbeddingCache:
    return EmbeddingCache(Path(config.output_dir) / CACHE_FILE)


def _load_schema(config: PipelineConfig) -> FhirSchema:
    corpus_path = Path(config.corpus_path)
    if not config.corpus_path:
        raise ConfigError("corpus_path is not configured")
    if not corpus_path.exists():
        raise ConfigError(f"corpus file not found: {corpus_path}")
    return load_corpus(corpus_path.read_text(encoding="utf-8"), config.corpus_version_label)


def _engine_config(config: PipelineConfig) -> EngineConfig:
    return EngineConfig(
        k=config.k,
        include_codes=config.include_codes,
        temperature=config.generator.temperature,
        max_output_tokens=config.generator.max_output_tokens,
        model_name=config.generator.model,
        max_attempts=config.generator.retries,
        backoff=config.generator.backoff,
        parallelism=config.parallelism,
    )


def run_index_build(config: PipelineConfig) -> dict:
    """Render corpus documents, chunk, embed, and persist the vector index."""
    config.validate()
    schema = _load_schema(config)
    documents = render_documents(schema)
    chunks = []
    for doc_id, text in documents:
        chunks.extend(
            split_text(
                text,
                chunk_size=config.chunk_size,
                chunk_overlap=config.chunk_overlap,
                doc_id=doc_id,
            )
        )
    embedder = make_embedder(config)
    cache = open_cache(config)
    vectors = embed_texts([chunk.text for chunk in chunks], embedder, cache)
    index = build_index(chunks, vectors)
    out_dir = Path(config.output_dir)
    index_digest = save_index(index, out_dir / INDEX_DIR)
    summary = {
        "config": config.to_dict(),
        "corpus_digest": _sha256_file(Path(config.corpus_path)),
        "index_digest": index_digest,
        "resources": len(schema.resources),
        "documents": len(documents),
        "chunks": len(chunks),
        "cache_hits": cache.hits,
        "cache_misses": cache.misses,
        "query_text_form": "rendered entry query",
    }
    _write_manifest(out_dir / "index_build_manifest.json", summary)
    return summary


def _load_dictionary(path: Path, config: PipelineConfig) -> DataDictionary:
    if not path.exists():
        raise ConfigError(f"dictionary file not found: {path}")
    return parse_dictionary(
        path.read_text(encoding="utf-8"),
        delimiter=config.delimiter,
        dataset_column=config.dataset_column,
        field_column=config.field_column,
        description_column=config.description_column,
        codes_column=config.codes_column,
    )


def _result_row(result: MappingResult) -> list[str]:
    dataset, fname = result.entry_key
    mapping = str(result.parsed_path) if result.parsed_path is not None else ""
    return [dataset, fname, mapping]


def _diagnostics_record(result: MappingResult, one_shot: bool) -> dict:
    return {
        "dataset_name": result.entry_key[0],
        "field_name": result.entry_key[1],
        "fhir_mapping": str(result.parsed_path) if result.parsed_path else "",
        "raw_response": result.raw_response,
        "parse_error": result.parse_error,
        "resource_known": result.validation.resource_known if result.validation else None,
        "element_known": result.validation.element_known if result.validation else None,
        "retrieved_chunk_ids": list(result.retrieved_chunk_ids),
        "one_shot_example": one_shot,
    }


def _one_shot_keys(dictionary: DataDictionary, engine: EngineConfig) -> set[tuple[str, str]]:
    example_input = engine.template.one_shot_example[0]
    return {
        entry.key
        for entry in dictionary.entries
        if entry_to_query(entry, include_codes=engine.include_codes) == example_input
    }


def run_map(config: PipelineConfig) -> dict:
    """Map every dictionary entry for every iteration; emit tables and diagnostics."""
    config.validate()
    index_dir = Path(config.output_dir) / INDEX_DIR
    if not index_dir.exists():
        raise ConfigError(f"no index at {index_dir}; run index-build first")
    index = load_index(index_dir)
    schema = _load_schema(config)
    embedder = make_embedder(config)
    cache = open_cache(config)
    client = make_client(config)
    engine = _engine_config(config)
    if not config.dictionary_paths:
        raise ConfigError("dictionary_paths is empty")

    mappings_dir = Path(config.output_dir) / MAPPINGS_DIR
    mappings_dir.mkdir(parents=True, exist_ok=True)
    total_entries = 0
    failed_entries = 0
    per_dataset_counts: dict[str, int] = {}
    for dict_path in config.dictionary_paths:
        dictionary = _load_dictionary(Path(dict_path), config)
        one_shot = _one_shot_keys(dictionary, engine)
        per_dataset_counts[dictionary.dataset_name] = len(dictionary.entries)
        stem = Path(dict_path).stem
        for iteration in range(1, config.iterations + 1):
            results = map_entries(
                dictionary.entries, schema, index, embedder, client, engine, cache
            )
            table = io.StringIO()
            writer = csv.writer(table, lineterminator="\n")
            writer.writerow(MAPPING_COLUMNS)
            diagnostics = io.StringIO()
            for entry in dictionary.entries:
                result = results[entry.key]
                writer.writerow(_result_row(result))
                diagnostics.write(
                    json.dumps(
                        _diagnostics_record(result, entry.key in one_shot), sort_keys=True
                    )
                    + "\n"
                )
                total_entries += 1
                if result.parsed_path is None:
                    failed_entries += 1
            base = mappings_dir / f"{stem}.iter{iteration:02d}"
            Path(str(base) + ".csv").write_text(table.getvalue(), encoding="utf-8")
            Path(str(base) + ".diagnostics.jsonl").write_text(
                diagnostics.getvalue(), encoding="utf-8"
            )
    summary = {
        "config": config.to_dict(),
        "index_digest": index.digest(),
        "entries_per_dataset": per_dataset_counts,
        "iterations": config.iterations,
        "total_entries": total_entries,
        "failed_entries": failed_entries,
    }
    _write_manifest(Path(config.output_dir) / "map_manifest.json", summary)
    return summary


def _read_mapping_table(path: Path) -> list[tuple[str, str, str]]:
    rows = list(csv.reader(io.StringIO(path.read_text(encoding="utf-8"))))
    if not rows or tuple(rows[0]) != MAPPING_COLUMNS:
        raise ConfigError(f"{path} is not a mapping table (header {rows[0] if rows else 'missing'})")
    return [(row[0], row[1], row[2] if len(row) > 2 else "") for row in rows[1:] if row]


def _collect_prediction_files(mappings_dir: Path) -> dict[int, list[Path]]:
    by_iteration: dict[int, list[Path]] = {}
    for path in sorted(mappings_dir.glob("*.csv")):
        match = _ITER_FILE.match(path.name)
        if match:
            by_iteration.setdefault(int(match.group("iteration")), []).append(path)
    return by_iteration


def run_evaluate(config: PipelineConfig) -> RunAggregate:
    """Join predictions against ground truth, score per dataset, aggregate, write scores.csv."""
    config.validate()
    if not config.ground_truth_path:
        raise ConfigError("ground_truth_path is not configured")
    gt_path = Path(config.ground_truth_path)
    if not gt_path.exists():
        raise ConfigError(f"ground-truth file not found: {gt_path}")
    ground_truth: dict[tuple[str, str], str] = {}
    for dataset, fname, mapping in _read_mapping_table(gt_path):
        ground_truth[(dataset, fname)] = mapping

    mappings_dir = Path(config.output_dir) / MAPPINGS_DIR
    by_iteration = _collect_prediction_files(mappings_dir)
    if not by_iteration:
        raise ConfigError(f"no mapping tables found under {mappings_dir}; run map first")

    excluded: set[tuple[str, str]] = set()
    engine = _engine_config(config)
    for dict_path in config.dictionary_paths:
        path = Path(dict_path)
        if path.exists():
            excluded |= _one_shot_keys(_load_dictionary(path, config), engine)

    iteration_scores = []
    for iteration in sorted(by_iteration):
        pairs_by_dataset: dict[str, list[EvaluationPair]] = {}
        missing: list[tuple[str, str]] = []
        for path in by_iteration[iteration]:
            for dataset, fname, mapping in _read_mapping_table(path):
                key = (dataset, fname)
                if key in excluded:
                    continue
                if key not in ground_truth:
                    missing.append(key)
                    continue
                try:
                    pred = parse_path(mapping) if mapping else None
                except PathError:
                    pred = None
                try:
                    gt = parse_path(ground_truth[key])
                except PathError as exc:
                    raise ConfigError(f"ground truth for {key} is not a valid path: {exc}")
                pairs_by_dataset.setdefault(dataset, []).append(EvaluationPair(key, pred, gt))
        if missing:
            raise JoinError(sorted(set(missing)))
        if not pairs_by_dataset:
            raise EmptyDatasetError(f"iteration {iteration} has no evaluable pairs")
        iteration_scores.append(
            {name: score_dataset(pairs, name) for name, pairs in pairs_by_dataset.items()}
        )
    result = aggregate(iteration_scores)
    _write_scores(Path(config.output_dir) / SCORES_FILE, result)
    _write_manifest(
        Path(config.output_dir) / "evaluate_manifest.json",
        {
            "config": config.to_dict(),
            "ground_truth_digest": _sha256_file(gt_path),
            "iterations": result.iteration_count,
            "datasets": sorted(result.per_dataset),
            "excluded_one_shot_keys": sorted(list(excluded)),
        },
    )
    return result


def _write_scores(path: Path, result: RunAggregate) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SCORE_COLUMNS)
    for name in sorted(result.per_dataset):
        stats = result.per_dataset[name]
        writer.writerow(
            [
                name,
                str(stats.score_mean),
                str(stats.score_stddev),
                str(stats.resource_match_mean),
                str(stats.resource_match_stddev),
            ]
        )
    total = result.total
    writer.writerow(
        [
            TOTAL_ROW,
            str(total.score_mean),
            str(total.score_stddev),
            str(total.resource_match_mean),
            str(total.resource_match_stddev),
        ]
    )
    path.write_text(buffer.getvalue(), encoding="utf-8")


def run_report(config: PipelineConfig) -> str:
    """Render scores plus run metadata to a text summary; returns the text."""
    out_dir = Path(config.output_dir)
    scores_path = out_dir / SCORES_FILE
    if not scores_path.exists():
        raise ConfigError(f"no score report at {scores_path}; run evaluate first")
    rows = list(csv.reader(io.StringIO(scores_path.read_text(encoding="utf-8"))))
    header, data = rows[0], rows[1:]

    def fmt(value: str) -> str:
        try:
            return f"{float(value):.4f}"
        except ValueError:
            return value

    lines = ["Mapping quality report", "======================", ""]
    widths = [max(len(header[i]), *(len(fmt(row[i])) for row in data)) for i in range(len(header))]
    lines.append("  ".join(header[i].ljust(widths[i]) for i in range(len(header))))
    for row in data:
        lines.append("  ".join(fmt(row[i]).ljust(widths[i]) for i in range(len(row))))
    lines.append("")
    for name in ("index_build_manifest.json", "map_manifest.json", "evaluate_manifest.json"):
        manifest_path = out_dir / name
        if not manifest_path.exists():
            continue
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        lines.append(f"[{name}]")
        for key in sorted(manifest):
            if key == "timestamp":  # keep the rendered report byte-reproducible
                continue
            if key == "config":
                snapshot = manifest[key]
                lines.append(
                    "  config: "
                    + " ".join(
                        f"{field}={snapshot[field]}"
                        for field in (
                            "k",
                            "chunk_size",
                            "chunk_overlap",
                            "iterations",
                            "parallelism",
                        )
                    )
                )
            else:
                lines.append(f"  {key}: {manifest[key]}")
        lines.append("")
    text = "\n".join(lines)
    (out_dir / REPORT_FILE).write_text(text, encoding="utf-8")
    return text
