"""Evaluation records: stored traces joined with their provenance."""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..errors import StoreCorrupted
from ..harness.store import RunKey, StoredTrace
from ..perturb.models import PerturbationRecord
from ..trace.schema import TracePayload
from ..trace.signals import SignalVector, derive_signals
from ..types import Artifact, Severity, Strategy, Variant

logger = logging.getLogger(__name__)


class EvaluationRecord(BaseModel):
    """Everything the metrics need about one stored trace."""

    model_config = ConfigDict(frozen=True)

    model_id: str
    variant: Variant
    sample_id: str
    severity: Optional[Severity] = None
    strategy: Optional[Strategy] = None
    affected_artifacts: List[Artifact] = Field(default_factory=list)
    ground_truth_summary: str = ""
    scores: Dict[str, float]
    signals: SignalVector
    ranking: List[Artifact]
    reported_artifacts: List[Artifact] = Field(default_factory=list)
    overall_confidence: float

    @property
    def key(self) -> RunKey:
        return RunKey(self.model_id, self.variant, self.sample_id)

    @property
    def should_fire(self) -> bool:
        """Mutation families carry an injected fault; BASE and removals do not."""
        return self.variant.is_mutation


def _provenance_fields(provenance: Mapping[str, object]) -> Dict[str, object]:
    return {
        "severity": provenance.get("severity"),
        "strategy": provenance.get("strategy"),
        "affected_artifacts": provenance.get("affected_artifacts") or [],
        "ground_truth_summary": provenance.get("ground_truth_summary") or "",
    }


def to_evaluation_record(stored: StoredTrace) -> EvaluationRecord:
    payload = TracePayload.model_validate(stored.trace)
    inconsistency = payload.consistency.inconsistency
    return EvaluationRecord.model_validate(
        {
            "model_id": stored.model_id,
            "variant": stored.variant,
            "sample_id": stored.sample_id,
            **_provenance_fields(stored.provenance),
            "scores": payload.assessment.scores(),
            "signals": derive_signals(payload),
            "ranking": payload.prioritization.order(),
            "reported_artifacts": (
                inconsistency.affected_artifacts if inconsistency.has_inconsistency else []
            ),
            "overall_confidence": payload.overall_confidence,
        }
    )


def build_records(
    traces: Iterable[StoredTrace],
    archives: Optional[Mapping[Variant, Sequence[PerturbationRecord]]] = None,
) -> List[EvaluationRecord]:
    """Join stored traces with provenance, in store order.

    When the perturbation archives are given, the provenance kept with each
    trace must agree with the archive record for its key.
    """
    index: Dict[Tuple[Variant, str], PerturbationRecord] = {}
    if archives is not None:
        index = {(v, r.sample_id): r for v, recs in archives.items() for r in recs}

    records: List[EvaluationRecord] = []
    for stored in traces:
        if archives is not None:
            source = index.get((stored.variant, stored.sample_id))
            if source is None or source.provenance != stored.provenance:
                raise StoreCorrupted(
                    f"provenance of {stored.key.as_id()} does not match the perturbation archive",
                    {"key": stored.key.as_id()},
                )
        records.append(to_evaluation_record(stored))
    logger.info(f"Built {len(records)} evaluation records")
    return records
