"""Exception types shared across the mapping pipeline."""


class FhirMapError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FhirMapError):
    """Invalid run configuration or unusable input file."""


# --- data-dictionary ingestion ---

class DictionaryError(FhirMapError):
    """Malformed data-dictionary input."""


class MissingColumnError(DictionaryError):
    pass


class DuplicateKeyError(DictionaryError):
    pass


class EmptyFieldNameError(DictionaryError):
    pass


class MixedDatasetError(DictionaryError):
    pass


# --- corpus and mapping paths ---

class CorpusError(FhirMapError):
    """Malformed corpus input."""


class MalformedRecordError(CorpusError):
    pass


class EmptyCorpusError(CorpusError):
    pass


class PathError(FhirMapError):
    """A text fragment is not a valid dotted mapping path."""


class EmptyPathError(PathError):
    pass


class BadBlockError(PathError):
    def __init__(self, block: str, position: int):
        self.block = block
        self.position = position
        super().__init__(f"invalid path block {block!r} at position {position}")


# --- chunking, embedding, retrieval ---

class BadParamsError(FhirMapError):
    pass


class EmbeddingError(FhirMapError):
    """Embedding could not be produced."""


class EmbedderUnavailableError(EmbeddingError):
    pass


class DimensionMismatchError(FhirMapError):
    pass


class CountMismatchError(FhirMapError):
    pass


class DuplicateChunkIdError(FhirMapError):
    pass


# --- generation ---

class GenerationError(FhirMapError):
    """Generation service failure."""


class TransportFailureError(GenerationError):
    """Transient transport problem; retryable."""


class ServiceRefusalError(GenerationError):
    """Non-retryable service response, surfaced with status detail."""


# --- evaluation ---

class EvaluationError(FhirMapError):
    pass


class EmptyDatasetError(EvaluationError):
    pass


class InconsistentIterationsError(EvaluationError):
    pass


class ContractViolationError(EvaluationError):
    pass


class JoinError(EvaluationError):
    """Prediction keys that cannot be joined against the ground truth."""

    def __init__(self, missing_keys):
        self.missing_keys = tuple(missing_keys)
        keys = ", ".join(f"({d}, {f})" for d, f in self.missing_keys)
        super().__init__(f"predicted keys absent from ground truth: {keys}")
