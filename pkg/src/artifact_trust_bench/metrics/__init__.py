"""Metrics over stored traces: detection, calibration, concordance and similarity."""

from .calibration import CalibrationGap, calibration_gap
from .concordance import concordance_scores, faulty_artifact, rank_concordance
from .detection import (
    attribution_accuracy,
    detection_rate,
    false_positive_floor,
    net_gain,
    strategy_gap,
)
from .records import EvaluationRecord, build_records, to_evaluation_record
from .report import (
    evaluate_records,
    read_metrics,
    summary_table,
    to_frame,
    write_metrics,
    write_tables,
)
from .scores import (
    MetricReport,
    ScoreDelta,
    SeverityBreakdown,
    delta_from_base,
    mean_scores,
    severity_breakdown,
)
from .similarity import (
    Embedder,
    HashingEmbedder,
    description_similarity,
    open_embedder,
    similarity_gap,
)

__all__ = [
    "CalibrationGap",
    "Embedder",
    "EvaluationRecord",
    "HashingEmbedder",
    "MetricReport",
    "ScoreDelta",
    "SeverityBreakdown",
    "attribution_accuracy",
    "build_records",
    "calibration_gap",
    "concordance_scores",
    "delta_from_base",
    "description_similarity",
    "detection_rate",
    "evaluate_records",
    "false_positive_floor",
    "faulty_artifact",
    "mean_scores",
    "net_gain",
    "open_embedder",
    "rank_concordance",
    "read_metrics",
    "severity_breakdown",
    "similarity_gap",
    "strategy_gap",
    "summary_table",
    "to_evaluation_record",
    "to_frame",
    "write_metrics",
    "write_tables",
]
