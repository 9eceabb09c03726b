"""Confidence calibration: detected versus missed perturbed samples."""

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel

from ..types import Signal
from .records import EvaluationRecord


class CalibrationGap(BaseModel):
    """``gap`` is None when either partition is empty."""

    detected_mean: Optional[float]
    missed_mean: Optional[float]
    gap: Optional[float]
    n_detected: int
    n_missed: int


def calibration_gap(records: Sequence[EvaluationRecord], signal: Signal) -> CalibrationGap:
    perturbed = [r for r in records if r.should_fire]
    detected = [r.overall_confidence for r in perturbed if r.signals.fires(signal)]
    missed = [r.overall_confidence for r in perturbed if not r.signals.fires(signal)]
    detected_mean = float(np.mean(detected)) if detected else None
    missed_mean = float(np.mean(missed)) if missed else None
    gap = None
    if detected_mean is not None and missed_mean is not None:
        gap = detected_mean - missed_mean
    return CalibrationGap(
        detected_mean=detected_mean,
        missed_mean=missed_mean,
        gap=gap,
        n_detected=len(detected),
        n_missed=len(missed),
    )
