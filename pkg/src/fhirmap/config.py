"""Run configuration: defaults, JSON loading, overrides, validation.

Auth tokens are deliberately absent here; remote clients read them from the
environment (FHIRMAP_EMBEDDER_API_KEY / FHIRMAP_GENERATOR_API_KEY).
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class EmbedderSettings:
    mode: str = "local"  # local | remote
    endpoint: str = ""
    model: str = "text-embedding-ada-002"
    dimension: int = 256
    retries: int = 3
    backoff: float = 0.5


@dataclass
class GeneratorSettings:
    mode: str = "mock"  # mock | remote
    endpoint: str = ""
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_output_tokens: int = 256
    retries: int = 3
    backoff: float = 0.5
    mock_responses_path: str = ""
    mock_default_response: str = ""


@dataclass
class PipelineConfig:
    corpus_path: str = ""
    dictionary_paths: list[str] = field(default_factory=list)
    ground_truth_path: str = ""
    output_dir: str = "out"
    k: int = 20
    chunk_size: int = 2000
    chunk_overlap: int = 200
    iterations: int = 10
    parallelism: int = 4
    embedder: EmbedderSettings = field(default_factory=EmbedderSettings)
    generator: GeneratorSettings = field(default_factory=GeneratorSettings)
    # dictionary table layout
    delimiter: str = ","
    dataset_column: str = "dataset_name"
    field_column: str = "field_name"
    description_column: str = "field_description"
    codes_column: str = "code_values"
    include_codes: bool = True
    corpus_version_label: str = "unspecified"

    def validate(self) -> None:
        if self.chunk_size <= 0:
            raise ConfigError(f"chunk_size must be positive, got {self.chunk_size}")
        if not 0 <= self.chunk_overlap < self.chunk_size:
            raise ConfigError(
                f"chunk_overlap ({self.chunk_overlap}) must be in [0, chunk_size={self.chunk_size})"
            )
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.embedder.mode not in ("local", "remote"):
            raise ConfigError(f"embedder.mode must be local or remote, got {self.embedder.mode!r}")
        if self.generator.mode not in ("mock", "remote"):
            raise ConfigError(f"generator.mode must be mock or remote, got {self.generator.mode!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _apply(target, values: dict, source: str) -> None:
    known = {f.name: f for f in dataclasses.fields(target)}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r} in {source}")
        current = getattr(target, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {key!r} must be an object")
            _apply(current, value, source)
        else:
            setattr(target, key, value)


def load_config(path: str | Path) -> PipelineConfig:
    """Load a JSON config file over the defaults; unknown keys are errors."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    config = PipelineConfig()
    _apply(config, raw, str(path))
    return config
