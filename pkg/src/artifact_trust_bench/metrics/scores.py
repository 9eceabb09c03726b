"""Assessment-score views: means, deltas from BASE and severity breakdowns."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import MetricUndefined
from ..types import ASSESSMENT_DIMENSIONS, SEVERITIES, Severity, Signal, Strategy, Variant
from .records import EvaluationRecord

logger = logging.getLogger(__name__)


class MetricReport(BaseModel):
    """One row of a metric table: grouping keys, statistic, value and dispersion."""

    model_config = ConfigDict(frozen=True)

    model_id: Optional[str] = None
    variant: Optional[Variant] = None
    severity: Optional[Severity] = None
    strategy: Optional[Strategy] = None
    signal: Optional[Signal] = None
    dimension: Optional[str] = None
    statistic: str
    value: Optional[float]
    n: int = Field(ge=0)
    std: Optional[float] = None
    note: str = ""


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    array = np.asarray(values, dtype=float)
    std = float(array.std(ddof=1)) if len(array) > 1 else 0.0
    return float(array.mean()), std


def mean_scores(records: Sequence[EvaluationRecord]) -> List[MetricReport]:
    """Mean and standard deviation per (model, variant, dimension)."""
    groups: Dict[Tuple[str, Variant], List[EvaluationRecord]] = {}
    for record in records:
        groups.setdefault((record.model_id, record.variant), []).append(record)

    rows: List[MetricReport] = []
    for (model_id, variant), members in sorted(groups.items(), key=lambda kv: kv[0]):
        for dimension in ASSESSMENT_DIMENSIONS:
            mean, std = _mean_std([r.scores[dimension] for r in members])
            rows.append(
                MetricReport(
                    model_id=model_id,
                    variant=variant,
                    dimension=dimension,
                    statistic="mean_score",
                    value=mean,
                    n=len(members),
                    std=std,
                )
            )
    return rows


class ScoreDelta(BaseModel):
    deltas: Dict[str, float]
    paired: int
    unpaired: int


def delta_from_base(
    base: Sequence[EvaluationRecord], perturbed: Sequence[EvaluationRecord]
) -> ScoreDelta:
    """mean(perturbed) - mean(base) per dimension over samples present in both."""
    base_by_id = {r.sample_id: r for r in base}
    perturbed_by_id = {r.sample_id: r for r in perturbed}
    shared = sorted(base_by_id.keys() & perturbed_by_id.keys())
    unpaired = len(base_by_id.keys() ^ perturbed_by_id.keys())
    if not shared:
        raise MetricUndefined("no paired samples between the two variants")
    if unpaired:
        logger.info(f"delta_from_base: {unpaired} unpaired samples excluded")

    deltas = {}
    for dimension in ASSESSMENT_DIMENSIONS:
        before = np.mean([base_by_id[s].scores[dimension] for s in shared])
        after = np.mean([perturbed_by_id[s].scores[dimension] for s in shared])
        deltas[dimension] = float(after - before)
    return ScoreDelta(deltas=deltas, paired=len(shared), unpaired=unpaired)


class SeverityBreakdown(BaseModel):
    means: Dict[Severity, float]
    stds: Dict[Severity, float]
    counts: Dict[Severity, int]
    monotonic: bool
    gap: float


def severity_breakdown(records: Sequence[EvaluationRecord]) -> SeverityBreakdown:
    """Mean overall score per tier.

    ``monotonic`` holds exactly when mean(HEAVY) < mean(NORMAL) <= mean(SUBTLE);
    ``gap`` is mean(SUBTLE) - mean(HEAVY).
    """
    tiers: Dict[Severity, List[float]] = {s: [] for s in SEVERITIES}
    for record in records:
        if record.severity is not None:
            tiers[record.severity].append(record.scores["overall"])
    empty = [s.value for s, values in tiers.items() if not values]
    if empty:
        raise MetricUndefined(
            f"severity tier(s) without samples: {', '.join(empty)}", {"empty": empty}
        )

    means: Dict[Severity, float] = {}
    stds: Dict[Severity, float] = {}
    for severity, values in tiers.items():
        means[severity], stds[severity] = _mean_std(values)
    heavy, normal, subtle = (means[s] for s in SEVERITIES)
    return SeverityBreakdown(
        means=means,
        stds=stds,
        counts={s: len(v) for s, v in tiers.items()},
        monotonic=heavy < normal <= subtle,
        gap=subtle - heavy,
    )
