"""Perturbation records and per-sample mutation conditions."""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..corpus.models import ArtifactBundle
from ..types import (
    SOURCES,
    Artifact,
    FaultCategory,
    Severity,
    Strategy,
    Variant,
    allowed_faults,
    targeted_artifacts,
)


class ReviewStatus(str, Enum):
    NOT_REQUIRED = "NOT_REQUIRED"
    PENDING = "PENDING"
    VERIFIED = "VERIFIED"


class MutationCondition(BaseModel):
    """What one mutation request asks for."""

    model_config = ConfigDict(frozen=True)

    variant: Variant
    severity: Severity
    strategy: Optional[Strategy] = None

    @model_validator(mode="after")
    def _check(self) -> "MutationCondition":
        if not self.variant.is_mutation:
            raise ValueError(f"{self.variant.value} is not a mutation family")
        if (self.variant is Variant.CONTRADICTION) != (self.strategy is not None):
            raise ValueError("strategy is required for CONTRADICTION and only for it")
        return self

    @property
    def targets(self) -> List[Artifact]:
        chosen = targeted_artifacts(self.variant, self.strategy)
        return [a for a in SOURCES if a in chosen]


class PerturbationRecord(BaseModel):
    """An aligned variant of a bundle together with its provenance."""

    model_config = ConfigDict(frozen=True)

    sample_id: str = Field(min_length=1)
    variant: Variant
    severity: Optional[Severity] = None
    strategy: Optional[Strategy] = None
    fault_category: Optional[FaultCategory] = None
    affected_artifacts: List[Artifact] = Field(default_factory=list)
    ground_truth_summary: str = ""
    change_description: str = ""
    review_status: ReviewStatus = ReviewStatus.NOT_REQUIRED

    javadoc: str
    mut_body: str
    signature: str
    test_prefix: str
    reference_assertion: Optional[str] = None
    origin: str = ""

    @field_validator("affected_artifacts")
    @classmethod
    def _canonical_order(cls, value: List[Artifact]) -> List[Artifact]:
        return [a for a in SOURCES if a in set(value)]

    @model_validator(mode="after")
    def _provenance_consistent(self) -> "PerturbationRecord":
        variant = self.variant
        if variant.is_mutation != (self.severity is not None):
            raise ValueError("severity is present exactly for mutation families")
        if (variant is Variant.CONTRADICTION) != (self.strategy is not None):
            raise ValueError("strategy is present exactly for CONTRADICTION")
        expected = targeted_artifacts(variant, self.strategy)
        if set(self.affected_artifacts) != expected:
            raise ValueError(
                f"affected_artifacts {sorted(a.value for a in self.affected_artifacts)} "
                f"do not match {variant.value}"
            )
        if variant.is_mutation:
            if self.fault_category not in allowed_faults(variant, self.strategy):
                raise ValueError(f"fault_category not valid for {variant.value}")
        elif self.fault_category is not None:
            raise ValueError("fault_category applies to mutation families only")
        return self

    @property
    def condition(self) -> Optional[MutationCondition]:
        if self.severity is None:
            return None
        return MutationCondition(
            variant=self.variant, severity=self.severity, strategy=self.strategy
        )

    @property
    def provenance(self) -> Dict[str, Any]:
        return {
            "variant": self.variant.value,
            "severity": self.severity.value if self.severity else None,
            "strategy": self.strategy.value if self.strategy else None,
            "fault_category": self.fault_category.value if self.fault_category else None,
            "affected_artifacts": [a.value for a in self.affected_artifacts],
            "ground_truth_summary": self.ground_truth_summary,
            "change_description": self.change_description,
        }

    def to_bundle(self) -> ArtifactBundle:
        return ArtifactBundle(
            sample_id=self.sample_id,
            mut_body=self.mut_body,
            signature=self.signature,
            javadoc=self.javadoc,
            test_prefix=self.test_prefix,
            reference_assertion=self.reference_assertion,
            origin=self.origin,
        )

    @classmethod
    def from_bundle(cls, bundle: ArtifactBundle, **overrides: Any) -> "PerturbationRecord":
        fields = bundle.model_dump()
        fields.update(overrides)
        return cls(**fields)

    @classmethod
    def base(cls, bundle: ArtifactBundle) -> "PerturbationRecord":
        return cls.from_bundle(bundle, variant=Variant.BASE)
