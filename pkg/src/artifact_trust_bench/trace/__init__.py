"""Reasoning-trace schema, repair, validation and conflict signals."""

from .repair import repair_raw_output
from .schema import PAIRWISE_KEYS, ReasoningTrace, SourcePrioritization, TracePayload
from .signals import SignalVector, derive_signals
from .validate import (
    DEFAULT_BANDS,
    LabelBands,
    label_disagreements,
    label_of,
    serialize_trace,
    validate_trace,
)

__all__ = [
    "DEFAULT_BANDS",
    "PAIRWISE_KEYS",
    "LabelBands",
    "ReasoningTrace",
    "SignalVector",
    "SourcePrioritization",
    "TracePayload",
    "derive_signals",
    "label_disagreements",
    "label_of",
    "repair_raw_output",
    "serialize_trace",
    "validate_trace",
]
