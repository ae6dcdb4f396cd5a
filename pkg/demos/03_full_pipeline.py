"""Run the whole pipeline offline: index-build, map, evaluate, report.

The generator is a scripted mock answering with the known ground truth, so
the run is fully deterministic and scores 100 across the board.

Run from the repository root:  python demos/03_full_pipeline.py
"""
import tempfile
from pathlib import Path

from fhirmap.config import PipelineConfig
from fhirmap.pipeline import run_evaluate, run_index_build, run_map, run_report

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

with tempfile.TemporaryDirectory() as workdir:
    config = PipelineConfig()
    config.corpus_path = str(DATA / "fhir_corpus_sample.jsonl")
    config.dictionary_paths = [str(DATA / "adni_dictionary.csv")]
    config.ground_truth_path = str(DATA / "adni_ground_truth.csv")
    config.output_dir = str(Path(workdir) / "out")
    config.iterations = 3
    config.generator.mock_responses_path = str(DATA / "adni_mock_responses.json")
    config.generator.backoff = 0.0

    built = run_index_build(config)
    print(f"indexed {built['chunks']} chunks, digest {built['index_digest'][:12]}")

    mapped = run_map(config)
    print(f"mapped {mapped['total_entries']} entries ({mapped['failed_entries']} failures)")

    mapping_table = Path(config.output_dir) / "mappings" / "adni_dictionary.iter01.csv"
    print("\nMapping table (iteration 1):")
    print(mapping_table.read_text(encoding="utf-8"))

    run_evaluate(config)
    print(run_report(config))
