"""Canonical wire models of a reasoning trace.

Top-level keys are ``assessment``, ``prioritization``, ``consistency``,
``metadata`` and ``overall_confidence``. Nothing is defaulted: a missing key is
a validation failure.
"""

from typing import Any, Dict, List, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_core import PydanticCustomError

from ..types import (
    ASSESSMENT_DIMENSIONS,
    SOURCES,
    Artifact,
    Label,
    Variant,
    Verdict,
    normalize_artifact,
)

PAIRWISE_KEYS: Tuple[str, ...] = (
    "javadoc_signature",
    "javadoc_mut",
    "javadoc_test_prefix",
    "signature_mut",
    "signature_test_prefix",
    "mut_test_prefix",
)

WIRE_KEYS = frozenset(
    {"assessment", "prioritization", "consistency", "metadata", "overall_confidence"}
)


class _Wire(BaseModel):
    model_config = ConfigDict(frozen=True, extra="ignore")


def _artifact(value: Any) -> Artifact:
    if isinstance(value, Artifact):
        return value
    try:
        return normalize_artifact(str(value))
    except ValueError:
        raise PydanticCustomError("enum", "unknown artifact {name}", {"name": str(value)}) from None


def _upper(value: Any) -> Any:
    return value.strip().upper() if isinstance(value, str) else value


class AssessmentEntry(_Wire):
    score: float = Field(ge=0.0, le=1.0)
    label: Label
    evidence: str

    @field_validator("label", mode="before")
    @classmethod
    def _label_case(cls, value: Any) -> Any:
        return _upper(value)

    @field_validator("score")
    @classmethod
    def _two_decimals(cls, value: float) -> float:
        return round(value, 2)


class QualityAssessment(_Wire):
    javadoc: AssessmentEntry
    signature: AssessmentEntry
    mut: AssessmentEntry
    test_prefix: AssessmentEntry
    overall: AssessmentEntry

    def entries(self) -> Dict[str, AssessmentEntry]:
        return {dim: getattr(self, dim) for dim in ASSESSMENT_DIMENSIONS}

    def scores(self) -> Dict[str, float]:
        return {dim: entry.score for dim, entry in self.entries().items()}


class RankedSource(_Wire):
    source: Artifact
    confidence: float = Field(ge=0.0, le=1.0)

    @field_validator("source", mode="before")
    @classmethod
    def _alias(cls, value: Any) -> Artifact:
        return _artifact(value)


class SourcePrioritization(_Wire):
    """Total reliability order; position 0 is rank 1 (most reliable)."""

    ranking: List[RankedSource] = Field(min_length=len(SOURCES))

    @model_validator(mode="after")
    def _distinct(self) -> "SourcePrioritization":
        seen: Set[Artifact] = set()
        for entry in self.ranking:
            if entry.source in seen:
                raise PydanticCustomError(
                    "duplicate_source",
                    "source {source} appears more than once",
                    {"source": entry.source.value},
                )
            seen.add(entry.source)
        return self

    def rank_of(self, artifact: Artifact) -> int:
        for position, entry in enumerate(self.ranking, start=1):
            if entry.source is artifact:
                return position
        raise KeyError(artifact)

    def order(self) -> List[Artifact]:
        return [entry.source for entry in self.ranking]


class PairVerdict(_Wire):
    verdict: Verdict
    explanation: str

    @model_validator(mode="before")
    @classmethod
    def _bare_verdict(cls, value: Any) -> Any:
        if isinstance(value, str):
            return {"verdict": value, "explanation": ""}
        return value

    @field_validator("verdict", mode="before")
    @classmethod
    def _verdict_case(cls, value: Any) -> Any:
        return _upper(value)

    @model_validator(mode="after")
    def _explained_contradiction(self) -> "PairVerdict":
        if self.verdict is Verdict.CONTRADICTORY and not self.explanation.strip():
            raise PydanticCustomError("missing", "a contradictory verdict needs an explanation")
        return self


class PairwiseVerdicts(_Wire):
    javadoc_signature: PairVerdict
    javadoc_mut: PairVerdict
    javadoc_test_prefix: PairVerdict
    signature_mut: PairVerdict
    signature_test_prefix: PairVerdict
    mut_test_prefix: PairVerdict

    @model_validator(mode="before")
    @classmethod
    def _key_case(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {str(k).strip().lower().replace("-", "_"): v for k, v in value.items()}
        return value


class Conflict(_Wire):
    artifacts: List[Artifact] = Field(min_length=1)
    description: str = Field(min_length=1)

    @field_validator("artifacts", mode="before")
    @classmethod
    def _aliases(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [_artifact(v) for v in value]
        return value

    @field_validator("description")
    @classmethod
    def _described(cls, value: str) -> str:
        if not value.strip():
            raise PydanticCustomError("missing", "a conflict needs a description")
        return value


class Inconsistency(_Wire):
    has_inconsistency: bool
    affected_artifacts: List[Artifact]
    description: str

    @field_validator("affected_artifacts", mode="before")
    @classmethod
    def _aliases(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [_artifact(v) for v in value]
        return value

    @model_validator(mode="after")
    def _affected_when_flagged(self) -> "Inconsistency":
        if self.has_inconsistency and not self.affected_artifacts:
            raise PydanticCustomError(
                "affected_empty", "affected_artifacts must be non-empty when flagged"
            )
        if self.has_inconsistency and not self.description.strip():
            raise PydanticCustomError("missing", "a flagged inconsistency needs a description")
        return self


class Anomaly(_Wire):
    flag: bool
    description: str


class ConsistencyReport(_Wire):
    pairwise: PairwiseVerdicts
    identified_conflicts: List[Conflict]
    inconsistency: Inconsistency
    anomaly: Anomaly
    behavioral_hypothesis: str


class TraceMetadata(_Wire):
    """Assumptions, limitations and uncertainty; present but possibly empty."""

    assumptions: str
    limitations: str
    uncertainty: str

    @field_validator("assumptions", "limitations", "uncertainty", mode="before")
    @classmethod
    def _join_lists(cls, value: Any) -> Any:
        if isinstance(value, list):
            return "; ".join(str(v) for v in value)
        return value


class TracePayload(_Wire):
    assessment: QualityAssessment
    prioritization: SourcePrioritization
    consistency: ConsistencyReport
    metadata: TraceMetadata
    overall_confidence: float = Field(ge=0.0, le=1.0)


class ReasoningTrace(TracePayload):
    """A validated trace bound to the matrix cell it answers."""

    sample_id: str
    variant: Variant
    model_id: str
    warnings: List[str] = Field(default_factory=list)
