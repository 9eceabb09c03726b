"""Agreement between the reliability ranking and fault provenance (Kendall's tau-b)."""

import math
from typing import List, Optional, Sequence, Tuple, Union

from scipy.stats import kendalltau

from ..errors import MetricUndefined
from ..trace.schema import SourcePrioritization
from ..types import SOURCES, Artifact, Strategy
from .records import EvaluationRecord

Ranking = Union[SourcePrioritization, Sequence[Artifact]]


def _order(prioritization: Ranking) -> List[Artifact]:
    if isinstance(prioritization, SourcePrioritization):
        return prioritization.order()
    return list(prioritization)


def rank_concordance(prioritization: Ranking, faulty: Artifact) -> float:
    """tau-b between the 0/1 faulty-artifact vector and rank numbers (1 = most reliable).

    Positive when the faulty artifact is ranked less reliable than the rest.
    """
    order = _order(prioritization)
    if sorted(a.value for a in order) != sorted(a.value for a in SOURCES):
        raise MetricUndefined("ranking must order each of the four sources exactly once")
    ranks = [order.index(a) + 1 for a in SOURCES]
    labels = [1 if a is faulty else 0 for a in SOURCES]
    tau, _ = kendalltau(labels, ranks, variant="b")
    if tau is None or math.isnan(tau):
        raise MetricUndefined("tau-b is undefined for this label vector")
    return float(tau)


def faulty_artifact(record: EvaluationRecord) -> Optional[Artifact]:
    """The single injected artifact, or None when there is not exactly one."""
    if not record.should_fire or record.strategy is Strategy.BOTH:
        return None
    if len(record.affected_artifacts) != 1:
        return None
    return record.affected_artifacts[0]


def concordance_scores(records: Sequence[EvaluationRecord]) -> Tuple[List[float], int]:
    """tau-b per single-fault record, plus how many BOTH-strategy records were excluded."""
    taus: List[float] = []
    excluded_both = 0
    for record in records:
        if record.strategy is Strategy.BOTH:
            excluded_both += 1
            continue
        faulty = faulty_artifact(record)
        if faulty is not None:
            taus.append(rank_concordance(record.ranking, faulty))
    return taus, excluded_both
