from __future__ import annotations

import json
from pathlib import Path

import pytest

from fhirmap import load_corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def sample_schema():
    return load_corpus((DATA_DIR / "fhir_corpus_sample.jsonl").read_text(encoding="utf-8"), "R5-sample")


@pytest.fixture
def adni_paths():
    return {
        "corpus": DATA_DIR / "fhir_corpus_sample.jsonl",
        "dictionary": DATA_DIR / "adni_dictionary.csv",
        "ground_truth": DATA_DIR / "adni_ground_truth.csv",
        "mock_responses": DATA_DIR / "adni_mock_responses.json",
    }


@pytest.fixture
def pipeline_config(tmp_path, adni_paths):
    """A ready-to-run offline config over the ADNI fixtures; returns (config, out_dir)."""
    from fhirmap.config import PipelineConfig

    config = PipelineConfig()
    config.corpus_path = str(adni_paths["corpus"])
    config.dictionary_paths = [str(adni_paths["dictionary"])]
    config.ground_truth_path = str(adni_paths["ground_truth"])
    config.output_dir = str(tmp_path / "out")
    config.iterations = 1
    config.parallelism = 1
    config.generator.mock_responses_path = str(adni_paths["mock_responses"])
    config.generator.backoff = 0.0
    config.corpus_version_label = "R5-sample"
    return config


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path
