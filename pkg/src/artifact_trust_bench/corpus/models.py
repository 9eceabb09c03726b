"""Bundle and curation-verdict records."""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ArtifactBundle(BaseModel):
    """One sample: method under test, signature, Javadoc and test prefix."""

    model_config = ConfigDict(frozen=True)

    sample_id: str = Field(min_length=1)
    mut_body: str
    signature: str
    javadoc: str
    test_prefix: str
    reference_assertion: Optional[str] = None
    origin: str = ""


class CurationVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_id: str
    accepted: bool
    failed_rules: List[str] = Field(default_factory=list)
    executable_line_count: int = Field(ge=0)
    control_flow_count: int = Field(ge=0)
    assignment_count: int = Field(ge=0)
    call_count: int = Field(ge=0)
    description_length: int = Field(ge=0)
    review_flags: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _accepted_iff_clean(self) -> "CurationVerdict":
        if self.accepted != (not self.failed_rules):
            raise ValueError("accepted must be true exactly when no rule failed")
        return self
