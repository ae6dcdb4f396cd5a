"""Match taxonomy and scoring for predicted versus ground-truth mapping paths.

Every prediction falls into exactly one class:

* absolute match — all blocks equal, in order and count;
* partial match — the resource block matches but the full paths differ;
* mismatch — the resource differs, or the prediction is absent.

A dataset's score is ``(absolute + summed partial credit) / total * 100``
where each partial match earns the Jaccard ratio of the two paths' block
sets.  The resource match score is ``(absolute + partial) / total * 100``.
Partial credit treats a path as a set of distinct block strings, resource
block included, so duplicated blocks collapse.
"""
from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import MappingPath
from .errors import (
    ContractViolationError,
    EmptyDatasetError,
    InconsistentIterationsError,
)


class MatchClass(enum.Enum):
    ABSOLUTE_MATCH = "absolute_match"
    PARTIAL_MATCH = "partial_match"
    MISMATCH = "mismatch"


@dataclass(frozen=True)
class EvaluationPair:
    """One scored structure: the predicted path (absent on failure) and its ground truth."""

    entry_key: tuple[str, str]
    pred: MappingPath | None
    gt: MappingPath


def classify(pred: MappingPath | None, gt: MappingPath) -> MatchClass:
    if pred is None:
        return MatchClass.MISMATCH
    if pred.blocks == gt.blocks:
        return MatchClass.ABSOLUTE_MATCH
    if pred.resource == gt.resource:
        return MatchClass.PARTIAL_MATCH
    return MatchClass.MISMATCH


def partial_credit(pred: MappingPath, gt: MappingPath) -> float:
    """Jaccard ratio of the two paths' distinct block sets, in (0, 1].

    Only defined for partial matches; calling it on any other pair raises
    ContractViolationError.
    """
    if classify(pred, gt) is not MatchClass.PARTIAL_MATCH:
        raise ContractViolationError(
            f"partial_credit is only defined for partial matches, got {pred} vs {gt}"
        )
    pred_blocks = set(pred.blocks)
    gt_blocks = set(gt.blocks)
    return len(pred_blocks & gt_blocks) / len(pred_blocks | gt_blocks)


@dataclass(frozen=True)
class DatasetScore:
    """Counts and derived percentages for one dataset in one mapping iteration."""

    dataset_name: str
    total: int
    absolute_matches: int
    partial_matches: int
    partial_credit_sum: float

    @property
    def score(self) -> float:
        return (self.absolute_matches + self.partial_credit_sum) / self.total * 100.0

    @property
    def resource_match_score(self) -> float:
        return (self.absolute_matches + self.partial_matches) / self.total * 100.0


def score_dataset(pairs: Sequence[EvaluationPair], dataset_name: str | None = None) -> DatasetScore:
    """Score one dataset's pairs.

    Requires a non-empty pair list with at most one pair per entry key.
    Absent predictions count as mismatches with the total unchanged.
    """
    if not pairs:
        raise EmptyDatasetError("cannot score an empty pair list")
    seen: set[tuple[str, str]] = set()
    for pair in pairs:
        if pair.entry_key in seen:
            raise ContractViolationError(f"duplicate entry key {pair.entry_key}")
        seen.add(pair.entry_key)
    if dataset_name is None:
        dataset_name = pairs[0].entry_key[0]
    absolute = 0
    partial = 0
    credit = 0.0
    for pair in pairs:
        match = classify(pair.pred, pair.gt)
        if match is MatchClass.ABSOLUTE_MATCH:
            absolute += 1
        elif match is MatchClass.PARTIAL_MATCH:
            partial += 1
            credit += partial_credit(pair.pred, pair.gt)
    return DatasetScore(dataset_name, len(pairs), absolute, partial, credit)


@dataclass(frozen=True)
class ScoreStats:
    """Mean and sample standard deviation of both percentages over iterations."""

    score_mean: float
    score_stddev: float
    resource_match_mean: float
    resource_match_stddev: float


@dataclass(frozen=True)
class RunAggregate:
    per_dataset: dict[str, ScoreStats]
    total: ScoreStats
    iteration_count: int


TOTAL_ROW = "Total"


def _stats(scores: Sequence[float], resource_scores: Sequence[float]) -> ScoreStats:
    # statistics.stdev is the n-1 estimator; a single iteration has zero spread.
    def stddev(values):
        return statistics.stdev(values) if len(values) > 1 else 0.0

    return ScoreStats(
        statistics.fmean(scores),
        stddev(scores),
        statistics.fmean(resource_scores),
        stddev(resource_scores),
    )


def pool_scores(scores: Sequence[DatasetScore], name: str = TOTAL_ROW) -> DatasetScore:
    """Pool structure counts across datasets into one combined score."""
    if not scores:
        raise EmptyDatasetError("cannot pool an empty score list")
    return DatasetScore(
        name,
        sum(s.total for s in scores),
        sum(s.absolute_matches for s in scores),
        sum(s.partial_matches for s in scores),
        sum(s.partial_credit_sum for s in scores),
    )


def aggregate(iteration_scores: Sequence[Mapping[str, DatasetScore]]) -> RunAggregate:
    """Average per-dataset and pooled-total scores over mapping iterations.

    Every iteration must cover the same dataset set.  The total row pools
    all structures within each iteration first, then averages the pooled
    percentages across iterations.
    """
    if not iteration_scores:
        raise InconsistentIterationsError("no iterations to aggregate")
    dataset_names = set(iteration_scores[0])
    for index, table in enumerate(iteration_scores[1:], start=2):
        if set(table) != dataset_names:
            raise InconsistentIterationsError(
                f"iteration {index} covers {sorted(set(table))}, expected {sorted(dataset_names)}"
            )
    per_dataset = {
        name: _stats(
            [table[name].score for table in iteration_scores],
            [table[name].resource_match_score for table in iteration_scores],
        )
        for name in sorted(dataset_names)
    }
    pooled = [pool_scores(list(table.values())) for table in iteration_scores]
    total = _stats([p.score for p in pooled], [p.resource_match_score for p in pooled])
    return RunAggregate(per_dataset, total, len(iteration_scores))
