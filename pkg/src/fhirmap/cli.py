"""Command-line interface: index-build, map, evaluate, report.

Exit codes: 0 success, 1 configuration or input error, 2 partial failure
(some entries failed), 3 total failure (every entry failed).
"""
from __future__ import annotations

import argparse
import sys

from .config import PipelineConfig, load_config
from .errors import ConfigError, FhirMapError
from .pipeline import run_evaluate, run_index_build, run_map, run_report

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_TOTAL_FAILURE = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the pipeline reserves 2 for partial
    # failures, so usage problems are rethrown as config errors instead.
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fhirmap", description=__doc__)
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--output-dir", help="directory for all run artifacts")
    parser.add_argument("--corpus", help="path to the corpus record file")
    parser.add_argument("--dictionary", action="append", dest="dictionaries",
                        help="dictionary table path (repeatable)")
    parser.add_argument("--ground-truth", help="ground-truth table path")
    parser.add_argument("--k", type=int, help="retrieval depth")
    parser.add_argument("--chunk-size", type=int)
    parser.add_argument("--chunk-overlap", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--parallelism", type=int)
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--embedder-endpoint", help="override the remote embedder URL")
    parser.add_argument("--generator-endpoint", help="override the remote generator URL")
    parser.add_argument("command", choices=["index-build", "map", "evaluate", "report"])
    return parser


def _configure(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    if args.output_dir is not None:
        config.output_dir = args.output_dir
    if args.corpus is not None:
        config.corpus_path = args.corpus
    if args.dictionaries:
        config.dictionary_paths = list(args.dictionaries)
    if args.ground_truth is not None:
        config.ground_truth_path = args.ground_truth
    for name in ("k", "chunk_size", "chunk_overlap", "iterations", "parallelism"):
        value = getattr(args, name)
        if value is not None:
            setattr(config, name, value)
    if args.temperature is not None:
        config.generator.temperature = args.temperature
    if args.embedder_endpoint is not None:
        config.embedder.endpoint = args.embedder_endpoint
    if args.generator_endpoint is not None:
        config.generator.endpoint = args.generator_endpoint
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _configure(args)
        if args.command == "index-build":
            summary = run_index_build(config)
            print(
                f"indexed {summary['chunks']} chunks from {summary['documents']} documents "
                f"({summary['cache_hits']} cache hits, {summary['cache_misses']} misses); "
                f"digest {summary['index_digest'][:12]}"
            )
            return EXIT_OK
        if args.command == "map":
            summary = run_map(config)
            total, failed = summary["total_entries"], summary["failed_entries"]
            print(f"mapped {total - failed}/{total} entries over {summary['iterations']} iteration(s)")
            if failed and failed == total:
                print("every entry failed", file=sys.stderr)
                return EXIT_TOTAL_FAILURE
            if failed:
                print(f"{failed} entries failed; see diagnostics", file=sys.stderr)
                return EXIT_PARTIAL
            return EXIT_OK
        if args.command == "evaluate":
            result = run_evaluate(config)
            total = result.total
            print(
                f"Total score {total.score_mean:.4f} (stddev {total.score_stddev:.4f}), "
                f"resource match {total.resource_match_mean:.4f} "
                f"(stddev {total.resource_match_stddev:.4f}) "
                f"over {result.iteration_count} iteration(s)"
            )
            return EXIT_OK
        print(run_report(config))
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FhirMapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
