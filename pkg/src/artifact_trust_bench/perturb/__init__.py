"""Aligned variants: deterministic Javadoc removals and validated mutations."""

from .engine import MutationEngine, MutationOutcome
from .matrix import (
    VariantMatrix,
    assemble_variant_matrix,
    assign_conditions,
    load_matrix,
    write_matrix,
)
from .models import MutationCondition, PerturbationRecord, ReviewStatus
from .mutation import build_mutation_request, validate_mutation
from .removal import (
    build_removal_records,
    strip_description,
    strip_description_and_return,
    strip_return_tag,
)

__all__ = [
    "MutationCondition",
    "MutationEngine",
    "MutationOutcome",
    "PerturbationRecord",
    "ReviewStatus",
    "VariantMatrix",
    "assemble_variant_matrix",
    "assign_conditions",
    "build_mutation_request",
    "build_removal_records",
    "load_matrix",
    "strip_description",
    "strip_description_and_return",
    "strip_return_tag",
    "validate_mutation",
    "write_matrix",
]
