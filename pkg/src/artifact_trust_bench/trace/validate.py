"""Strict validation, canonical serialization and label banding of traces."""

import json
import logging
from typing import Any, Dict, List, Mapping, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import (
    BadEnumError,
    DuplicateSourceError,
    MissingFieldError,
    OutOfRangeError,
    ParseFailure,
    TraceValidationError,
)
from ..types import Label, Variant
from .schema import WIRE_KEYS, ReasoningTrace, TracePayload

logger = logging.getLogger(__name__)


class LabelBands(BaseModel):
    """Score cut points: LOW below ``medium``, HIGH from ``high`` upward."""

    model_config = ConfigDict(frozen=True)

    medium: float = Field(default=0.40, gt=0.0, lt=1.0)
    high: float = Field(default=0.70, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _ordered(self) -> "LabelBands":
        if not self.medium < self.high:
            raise ValueError("medium cut point must be below the high cut point")
        return self


DEFAULT_BANDS = LabelBands()


def label_of(score: float, bands: LabelBands = DEFAULT_BANDS) -> Label:
    if not 0.0 <= score <= 1.0:
        raise OutOfRangeError("score", f"{score} is outside [0, 1]")
    if score < bands.medium:
        return Label.LOW
    if score < bands.high:
        return Label.MEDIUM
    return Label.HIGH


_MISSING_TYPES = frozenset({"missing", "too_short", "affected_empty", "string_too_short"})
_RANGE_PREFIXES = ("greater_than", "less_than")
_ENUM_TYPES = frozenset({"enum", "literal_error"})


def _error_from(error: Mapping[str, Any]) -> TraceValidationError:
    path = ".".join(str(part) for part in error["loc"]) or "$"
    kind = error["type"]
    message = error["msg"]
    if kind == "affected_empty":
        path = f"{path}.affected_artifacts"
    if kind in _MISSING_TYPES:
        return MissingFieldError(path, message)
    if kind.startswith(_RANGE_PREFIXES):
        return OutOfRangeError(path, message)
    if kind == "duplicate_source":
        return DuplicateSourceError(path, message)
    if kind in _ENUM_TYPES:
        return BadEnumError(path, message)
    return TraceValidationError(path, message)


def _as_object(candidate: Union[str, Mapping[str, Any]]) -> Dict[str, Any]:
    if isinstance(candidate, str):
        try:
            parsed = json.loads(candidate)
        except json.JSONDecodeError as e:
            raise ParseFailure(f"candidate is not valid JSON: {e}", candidate) from e
    else:
        parsed = dict(candidate)
    if not isinstance(parsed, dict):
        raise MissingFieldError("$", "trace must be a single object")
    return parsed


def validate_trace(
    candidate: Union[str, Mapping[str, Any]],
    sample_id: str,
    variant: Variant,
    model_id: str,
    bands: LabelBands = DEFAULT_BANDS,
) -> ReasoningTrace:
    """Validate a repaired candidate into a trace bound to its matrix cell.

    Raises the first violation as MissingFieldError, OutOfRangeError,
    DuplicateSourceError or BadEnumError carrying its location. Label/score
    disagreements are kept as warnings on the trace.
    """
    payload = {k: v for k, v in _as_object(candidate).items() if k in WIRE_KEYS}
    try:
        trace = ReasoningTrace.model_validate(
            {**payload, "sample_id": sample_id, "variant": variant, "model_id": model_id}
        )
    except ValidationError as e:
        raise _error_from(e.errors()[0]) from None

    warnings = label_disagreements(trace, bands)
    if warnings:
        logger.info(
            f"{model_id}|{variant.value}|{sample_id}: {len(warnings)} label disagreement(s)"
        )
        trace = trace.model_copy(update={"warnings": warnings})
    return trace


def serialize_trace(trace: TracePayload) -> Dict[str, Any]:
    """The canonical wire object (identity fields and warnings excluded)."""
    return trace.model_dump(mode="json", include=set(WIRE_KEYS))


def label_disagreements(trace: TracePayload, bands: LabelBands = DEFAULT_BANDS) -> List[str]:
    warnings: List[str] = []
    for dimension, entry in trace.assessment.entries().items():
        expected = label_of(entry.score, bands)
        if entry.label is not expected:
            warnings.append(
                f"{dimension}: label {entry.label.value} but score {entry.score:.2f} "
                f"bands to {expected.value}"
            )
    return warnings
