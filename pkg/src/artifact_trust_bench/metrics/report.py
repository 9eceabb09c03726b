"""Metric tables: every statistic as a long-format row, written with pandas."""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import pandas as pd

from ..archive import read_models, write_records
from ..errors import MetricUndefined
from ..types import (
    CONFLICT_SIGNALS,
    MUTATION_VARIANTS,
    SEVERITIES,
    Severity,
    Signal,
    Strategy,
    Variant,
)
from .calibration import calibration_gap
from .concordance import concordance_scores
from .detection import (
    attribution_accuracy,
    detection_rate,
    false_positive_floor,
    net_gain,
    strategy_gap,
)
from .records import EvaluationRecord
from .scores import MetricReport, delta_from_base, mean_scores, severity_breakdown
from .similarity import Embedder, SimilarityScores, description_similarity, similarity_gap

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.jsonl"
ALL_SIGNALS: Tuple[Signal, ...] = tuple(Signal)

T = TypeVar("T")


def _by(items: Iterable[T], key: Callable[[T], Any]) -> Dict[Any, List[T]]:
    groups: Dict[Any, List[T]] = {}
    for item in items:
        groups.setdefault(key(item), []).append(item)
    return groups


def _undefined(
    statistic: str, error: MetricUndefined, n: int = 0, **group: Any
) -> MetricReport:
    return MetricReport(statistic=statistic, value=None, n=n, note=error.message, **group)


def _delta_rows(model_id: str, members: Sequence[EvaluationRecord]) -> List[MetricReport]:
    rows: List[MetricReport] = []
    by_variant = _by(members, lambda r: r.variant)
    base = by_variant.get(Variant.BASE, [])
    for variant in Variant:
        if variant is Variant.BASE or variant not in by_variant:
            continue
        try:
            delta = delta_from_base(base, by_variant[variant])
        except MetricUndefined as e:
            rows.append(_undefined("delta_from_base", e, model_id=model_id, variant=variant))
            continue
        note = f"{delta.unpaired} unpaired excluded" if delta.unpaired else ""
        for dimension, value in delta.deltas.items():
            rows.append(
                MetricReport(
                    model_id=model_id,
                    variant=variant,
                    dimension=dimension,
                    statistic="delta_from_base",
                    value=value,
                    n=delta.paired,
                    note=note,
                )
            )
    return rows


def _severity_rows(model_id: str, members: Sequence[EvaluationRecord]) -> List[MetricReport]:
    rows: List[MetricReport] = []
    for family, family_records in _by(members, lambda r: r.variant).items():
        assert isinstance(family, Variant)
        if not family.is_mutation:
            continue
        try:
            breakdown = severity_breakdown(family_records)
        except MetricUndefined as e:
            rows.append(_undefined("severity_breakdown", e, model_id=model_id, variant=family))
            continue
        for severity in SEVERITIES:
            rows.append(
                MetricReport(
                    model_id=model_id,
                    variant=family,
                    severity=severity,
                    dimension="overall",
                    statistic="severity_mean",
                    value=breakdown.means[severity],
                    std=breakdown.stds[severity],
                    n=breakdown.counts[severity],
                )
            )
        n = len(family_records)
        rows.append(
            MetricReport(
                model_id=model_id,
                variant=family,
                statistic="severity_gap",
                value=breakdown.gap,
                n=n,
            )
        )
        rows.append(
            MetricReport(
                model_id=model_id,
                variant=family,
                statistic="severity_monotonic",
                value=1.0 if breakdown.monotonic else 0.0,
                n=n,
            )
        )
    return rows


def _rate_row(
    statistic: str, members: Sequence[EvaluationRecord], signal: Signal, **group: Any
) -> MetricReport:
    try:
        value = detection_rate(members, signal)
    except MetricUndefined as e:
        return _undefined(statistic, e, signal=signal, **group)
    return MetricReport(statistic=statistic, value=value, n=len(members), signal=signal, **group)


def _floor_rows(
    model_id: str,
    members: Sequence[EvaluationRecord],
    by_variant: Dict[Any, List[EvaluationRecord]],
    signal: Signal,
) -> List[MetricReport]:
    try:
        floor = false_positive_floor(members, signal)
    except MetricUndefined as e:
        return [_undefined("false_positive_floor", e, model_id=model_id, signal=signal)]
    rows = [
        MetricReport(
            model_id=model_id,
            variant=Variant.BASE,
            signal=signal,
            statistic="false_positive_floor",
            value=floor,
            n=len(by_variant.get(Variant.BASE, [])),
        )
    ]
    for variant in MUTATION_VARIANTS:
        if variant not in by_variant:
            continue
        rows.append(
            MetricReport(
                model_id=model_id,
                variant=variant,
                signal=signal,
                statistic="net_gain_pp",
                value=net_gain(detection_rate(by_variant[variant], signal), floor),
                n=len(by_variant[variant]),
            )
        )
    return rows


def _detection_rows(model_id: str, members: Sequence[EvaluationRecord]) -> List[MetricReport]:
    rows: List[MetricReport] = []
    by_variant = _by(members, lambda r: r.variant)
    for signal in ALL_SIGNALS:
        for variant, group in by_variant.items():
            rows.append(
                _rate_row("detection_rate", group, signal, model_id=model_id, variant=variant)
            )
            tiers = _by(group, lambda r: r.severity)
            for severity, tier in tiers.items():
                if severity is not None:
                    rows.append(
                        _rate_row(
                            "detection_rate",
                            tier,
                            signal,
                            model_id=model_id,
                            variant=variant,
                            severity=severity,
                        )
                    )
            if Severity.HEAVY in tiers and Severity.SUBTLE in tiers:
                heavy, subtle = tiers[Severity.HEAVY], tiers[Severity.SUBTLE]
                rows.append(
                    MetricReport(
                        model_id=model_id,
                        variant=variant,
                        signal=signal,
                        statistic="severity_rate_gap_pp",
                        value=net_gain(
                            detection_rate(heavy, signal), detection_rate(subtle, signal)
                        ),
                        n=len(heavy) + len(subtle),
                        note="HEAVY - SUBTLE",
                    )
                )
        contradiction = by_variant.get(Variant.CONTRADICTION, [])
        for strategy, group in _by(contradiction, lambda r: r.strategy).items():
            rows.append(
                _rate_row(
                    "detection_rate",
                    group,
                    signal,
                    model_id=model_id,
                    variant=Variant.CONTRADICTION,
                    strategy=strategy,
                )
            )

        rows += _floor_rows(model_id, members, by_variant, signal)
        try:
            gaps = strategy_gap(members, signal)
        except MetricUndefined as e:
            rows.append(_undefined("strategy_gap_pp", e, model_id=model_id, signal=signal))
        else:
            for label, value in gaps.items():
                rows.append(
                    MetricReport(
                        model_id=model_id,
                        variant=Variant.CONTRADICTION,
                        strategy=Strategy(label.split("_vs_")[0]),
                        signal=signal,
                        statistic="strategy_gap_pp",
                        value=value,
                        n=len(contradiction),
                        note=label,
                    )
                )
    return rows


def _calibration_rows(model_id: str, members: Sequence[EvaluationRecord]) -> List[MetricReport]:
    rows: List[MetricReport] = []
    for signal in ALL_SIGNALS:
        result = calibration_gap(members, signal)
        sizes = f"detected={result.n_detected} missed={result.n_missed}"
        for statistic, value, n in (
            ("confidence_detected", result.detected_mean, result.n_detected),
            ("confidence_missed", result.missed_mean, result.n_missed),
            ("calibration_gap", result.gap, result.n_detected + result.n_missed),
        ):
            rows.append(
                MetricReport(
                    model_id=model_id,
                    signal=signal,
                    statistic=statistic,
                    value=value,
                    n=n,
                    note=sizes if value is None or statistic == "calibration_gap" else "",
                )
            )
    return rows


def _concordance_rows(model_id: str, members: Sequence[EvaluationRecord]) -> List[MetricReport]:
    rows: List[MetricReport] = []
    for variant in MUTATION_VARIANTS:
        family = [r for r in members if r.variant is variant]
        if not family:
            continue
        groups: List[Tuple[Dict[str, object], Sequence[EvaluationRecord]]] = [({}, family)]
        groups += [({"severity": s}, [r for r in family if r.severity is s]) for s in SEVERITIES]
        for extra, group in groups:
            taus, excluded = concordance_scores(group)
            note = f"{excluded} BOTH-strategy records excluded" if excluded else ""
            rows.append(
                MetricReport(
                    model_id=model_id,
                    variant=variant,
                    statistic="rank_concordance_tau_b",
                    value=float(np.mean(taus)) if taus else None,
                    std=float(np.std(taus, ddof=1)) if len(taus) > 1 else None,
                    n=len(taus),
                    note=note,
                    **extra,
                )
            )
    return rows


def _similarity_rows(
    model_id: str,
    members: Sequence[EvaluationRecord],
    embedder: Optional[Embedder],
    primary: Signal,
    combined: str,
    unavailable: str,
) -> List[MetricReport]:
    perturbed = [r for r in members if r.should_fire]
    if embedder is None:
        return [
            MetricReport(
                model_id=model_id,
                statistic="description_similarity",
                value=None,
                n=len(perturbed),
                note=f"unavailable: {unavailable}",
            )
        ]
    rows: List[MetricReport] = []
    combined_note = f"combined={combined}"
    scored = [
        (r, description_similarity(r.signals, r.ground_truth_summary, embedder, combined))
        for r in perturbed
    ]
    for variant, scored_variant in _by(scored, lambda pair: pair[0].variant).items():
        tiers = _by(scored_variant, lambda pair: pair[0].severity)
        groups: List[Tuple[Optional[Severity], List[Tuple[EvaluationRecord, SimilarityScores]]]]
        groups = [(None, scored_variant)]
        groups += [(s, tiers[s]) for s in SEVERITIES if s in tiers]
        for severity, group in groups:
            series: List[Tuple[Optional[Signal], str, List[float]]] = [
                (s, "description_similarity", [score.per_signal[s] for _, score in group])
                for s in CONFLICT_SIGNALS
            ]
            series.append(
                (None, "description_similarity_combined", [score.combined for _, score in group])
            )
            for signal, statistic, values in series:
                rows.append(
                    MetricReport(
                        model_id=model_id,
                        variant=variant,
                        severity=severity,
                        signal=signal,
                        statistic=statistic,
                        value=float(np.mean(values)),
                        std=float(np.std(values, ddof=1)) if len(values) > 1 else None,
                        n=len(values),
                        note=combined_note if signal is None else "",
                    )
                )
        if Severity.HEAVY in tiers and Severity.SUBTLE in tiers:
            heavy = [score.combined for _, score in tiers[Severity.HEAVY]]
            subtle = [score.combined for _, score in tiers[Severity.SUBTLE]]
            rows.append(
                MetricReport(
                    model_id=model_id,
                    variant=variant,
                    statistic="similarity_severity_gap",
                    value=float(np.mean(heavy)) - float(np.mean(subtle)),
                    n=len(heavy) + len(subtle),
                    note=f"HEAVY - SUBTLE, {combined_note}",
                )
            )
    detected = [s.combined for r, s in scored if r.signals.fires(primary)]
    missed = [s.combined for r, s in scored if not r.signals.fires(primary)]
    try:
        mean_detected, mean_missed, gap = similarity_gap(detected, missed)
    except MetricUndefined as e:
        rows.append(_undefined("similarity_gap", e, model_id=model_id, signal=primary))
    else:
        for statistic, value, n in (
            ("similarity_detected", mean_detected, len(detected)),
            ("similarity_missed", mean_missed, len(missed)),
            ("similarity_gap", gap, len(detected) + len(missed)),
        ):
            rows.append(
                MetricReport(
                    model_id=model_id,
                    signal=primary,
                    statistic=statistic,
                    value=value,
                    n=n,
                    note=combined_note,
                )
            )
    return rows


def evaluate_records(
    records: Sequence[EvaluationRecord],
    embedder: Optional[Embedder] = None,
    primary_signal: Signal = Signal.IR,
    combined: str = "concat",
    embedder_error: str = "no embedder configured",
) -> List[MetricReport]:
    """Every metric table row for ``records``, grouped per model."""
    rows = mean_scores(records)
    for model_id, members in sorted(_by(records, lambda r: r.model_id).items()):
        assert isinstance(model_id, str)
        rows += _delta_rows(model_id, members)
        rows += _severity_rows(model_id, members)
        rows += _detection_rows(model_id, members)
        rows += _calibration_rows(model_id, members)
        rows += _concordance_rows(model_id, members)
        try:
            rows.append(
                MetricReport(
                    model_id=model_id,
                    statistic="attribution_accuracy",
                    value=attribution_accuracy(members),
                    n=sum(1 for r in members if r.should_fire and len(r.affected_artifacts) == 1),
                )
            )
        except MetricUndefined as e:
            rows.append(_undefined("attribution_accuracy", e, model_id=model_id))
        rows += _similarity_rows(
            model_id, members, embedder, primary_signal, combined, embedder_error
        )
    logger.info(f"Computed {len(rows)} metric rows over {len(records)} records")
    return rows


def to_frame(rows: Sequence[MetricReport]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump(mode="json") for row in rows])


def write_metrics(directory: Path, rows: Sequence[MetricReport]) -> Path:
    path = Path(directory) / METRICS_FILE
    write_records(path, rows)
    return path


def read_metrics(directory: Path) -> List[MetricReport]:
    return read_models(Path(directory) / METRICS_FILE, MetricReport)


# Plot-ready tables: file name -> statistics it holds.
TABLES: Dict[str, Tuple[str, ...]] = {
    "scores.csv": ("mean_score", "delta_from_base"),
    "severity.csv": ("severity_mean", "severity_gap", "severity_monotonic"),
    "detection.csv": (
        "detection_rate",
        "false_positive_floor",
        "net_gain_pp",
        "strategy_gap_pp",
        "severity_rate_gap_pp",
        "attribution_accuracy",
    ),
    "similarity.csv": (
        "description_similarity",
        "description_similarity_combined",
        "similarity_severity_gap",
        "similarity_detected",
        "similarity_missed",
        "similarity_gap",
    ),
    "calibration.csv": ("confidence_detected", "confidence_missed", "calibration_gap"),
    "concordance.csv": ("rank_concordance_tau_b",),
}


def write_tables(directory: Path, rows: Sequence[MetricReport]) -> Dict[str, int]:
    """One delimiter-separated long-format table per figure group, plus all rows."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frame = to_frame(rows)
    written = {"metrics.csv": len(frame)}
    frame.to_csv(directory / "metrics.csv", index=False)
    for name, statistics in TABLES.items():
        subset = frame[frame["statistic"].isin(statistics)] if len(frame) else frame
        subset.to_csv(directory / name, index=False)
        written[name] = len(subset)
    logger.info(f"Wrote {len(written)} report tables to {directory}")
    return written


def summary_table(rows: Sequence[MetricReport], signal: Signal = Signal.IR) -> str:
    """Human-readable model x variant detection rates for ``signal``."""
    frame = to_frame(rows)
    if frame.empty:
        return "(no metrics)"
    rates = frame[
        (frame["statistic"] == "detection_rate")
        & (frame["signal"] == signal.value)
        & frame["severity"].isna()
        & frame["strategy"].isna()
    ]
    if rates.empty:
        return "(no detection rates)"
    pivot = rates.pivot_table(index="model_id", columns="variant", values="value", aggfunc="first")
    return f"{signal.value} detection rate\n{pivot.round(3).to_string()}"
