"""Detection rates, false-positive floors, net gains and attribution."""

from typing import Dict, Sequence

from ..errors import MetricUndefined
from ..types import Signal, Strategy, Variant
from .records import EvaluationRecord


def detection_rate(records: Sequence[EvaluationRecord], signal: Signal) -> float:
    """Share of ``records`` whose signal vector fires ``signal``."""
    if not records:
        raise MetricUndefined(f"no records to compute a {signal.value} rate over")
    return sum(r.signals.fires(signal) for r in records) / len(records)


def false_positive_floor(records: Sequence[EvaluationRecord], signal: Signal) -> float:
    """Detection rate on clean BASE records."""
    return detection_rate([r for r in records if r.variant is Variant.BASE], signal)


def net_gain(perturbed_rate: float, base_rate: float) -> float:
    """Perturbed-variant rate above the false-positive floor, in percentage points."""
    return (perturbed_rate - base_rate) * 100.0


def strategy_gap(records: Sequence[EvaluationRecord], signal: Signal) -> Dict[str, float]:
    """Contradiction detection of each single-side strategy relative to BOTH, in pp."""
    contradiction = [r for r in records if r.variant is Variant.CONTRADICTION]
    by_strategy = {
        s: detection_rate([r for r in contradiction if r.strategy is s], signal)
        for s in Strategy
    }
    both = by_strategy[Strategy.BOTH]
    return {
        "MUT_ONLY_vs_BOTH": (by_strategy[Strategy.MUT_ONLY] - both) * 100.0,
        "DOCSTRING_ONLY_vs_BOTH": (by_strategy[Strategy.DOCSTRING_ONLY] - both) * 100.0,
    }


def attribution_accuracy(records: Sequence[EvaluationRecord]) -> float:
    """Share of single-fault records whose inconsistency report names the injected artifact."""
    single = [r for r in records if r.should_fire and len(r.affected_artifacts) == 1]
    if not single:
        raise MetricUndefined("no single-fault records")
    hits = sum(r.affected_artifacts[0] in r.reported_artifacts for r in single)
    return hits / len(single)
