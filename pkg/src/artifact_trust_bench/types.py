"""Shared vocabulary: artifacts, dataset variants, severity tiers, strategies."""

from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple


class Artifact(str, Enum):
    JAVADOC = "JAVADOC"
    SIGNATURE = "SIGNATURE"
    MUT = "MUT"
    TEST_PREFIX = "TEST_PREFIX"


# Canonical order used for label vectors, pairwise keys and prompt sections.
SOURCES: Tuple[Artifact, ...] = (
    Artifact.JAVADOC,
    Artifact.SIGNATURE,
    Artifact.MUT,
    Artifact.TEST_PREFIX,
)

# Wire keys of the assessment block, in report order.
ASSESSMENT_DIMENSIONS: Tuple[str, ...] = ("javadoc", "signature", "mut", "test_prefix", "overall")


class Variant(str, Enum):
    BASE = "BASE"
    DOC_DESC_REMOVED = "DOC_DESC_REMOVED"
    DOC_RETURN_REMOVED = "DOC_RETURN_REMOVED"
    DOC_DESC_RETURN_REMOVED = "DOC_DESC_RETURN_REMOVED"
    DOC_BUG = "DOC_BUG"
    MUT_BUG = "MUT_BUG"
    CONTRADICTION = "CONTRADICTION"

    @property
    def is_mutation(self) -> bool:
        return self in MUTATION_VARIANTS

    @property
    def is_removal(self) -> bool:
        return self in REMOVAL_VARIANTS


REMOVAL_VARIANTS: FrozenSet[Variant] = frozenset(
    {Variant.DOC_DESC_REMOVED, Variant.DOC_RETURN_REMOVED, Variant.DOC_DESC_RETURN_REMOVED}
)
MUTATION_VARIANTS: Tuple[Variant, ...] = (Variant.DOC_BUG, Variant.MUT_BUG, Variant.CONTRADICTION)
ALL_VARIANTS: Tuple[Variant, ...] = tuple(Variant)


class Severity(str, Enum):
    HEAVY = "HEAVY"
    NORMAL = "NORMAL"
    SUBTLE = "SUBTLE"


SEVERITIES: Tuple[Severity, ...] = (Severity.HEAVY, Severity.NORMAL, Severity.SUBTLE)


class Strategy(str, Enum):
    MUT_ONLY = "MUT_ONLY"
    DOCSTRING_ONLY = "DOCSTRING_ONLY"
    BOTH = "BOTH"


STRATEGIES: Tuple[Strategy, ...] = (Strategy.MUT_ONLY, Strategy.DOCSTRING_ONLY, Strategy.BOTH)


class FaultCategory(str, Enum):
    # implementation faults
    LOGIC = "LOGIC"
    NULL_CHECK = "NULL_CHECK"
    BOUNDARY = "BOUNDARY"
    API_MISUSE = "API_MISUSE"
    # documentation faults
    WRONG_BEHAVIOR = "WRONG_BEHAVIOR"
    WRONG_RETURN = "WRONG_RETURN"
    WRONG_PARAMS = "WRONG_PARAMS"
    MISSING_INFO = "MISSING_INFO"


MUT_FAULTS: FrozenSet[FaultCategory] = frozenset(
    {
        FaultCategory.LOGIC,
        FaultCategory.NULL_CHECK,
        FaultCategory.BOUNDARY,
        FaultCategory.API_MISUSE,
    }
)
DOC_FAULTS: FrozenSet[FaultCategory] = frozenset(
    {
        FaultCategory.WRONG_BEHAVIOR,
        FaultCategory.WRONG_RETURN,
        FaultCategory.WRONG_PARAMS,
        FaultCategory.MISSING_INFO,
    }
)


def targeted_artifacts(
    variant: Variant, strategy: Optional[Strategy] = None
) -> FrozenSet[Artifact]:
    """Artifacts a variant is allowed to modify."""
    if variant.is_removal or variant is Variant.DOC_BUG:
        return frozenset({Artifact.JAVADOC})
    if variant is Variant.MUT_BUG:
        return frozenset({Artifact.MUT})
    if variant is Variant.CONTRADICTION:
        if strategy is Strategy.MUT_ONLY:
            return frozenset({Artifact.MUT})
        if strategy is Strategy.DOCSTRING_ONLY:
            return frozenset({Artifact.JAVADOC})
        if strategy is Strategy.BOTH:
            return frozenset({Artifact.JAVADOC, Artifact.MUT})
        raise ValueError("CONTRADICTION requires a strategy")
    return frozenset()


def allowed_faults(
    variant: Variant, strategy: Optional[Strategy] = None
) -> FrozenSet[FaultCategory]:
    targets = targeted_artifacts(variant, strategy)
    allowed: FrozenSet[FaultCategory] = frozenset()
    if Artifact.JAVADOC in targets:
        allowed |= DOC_FAULTS
    if Artifact.MUT in targets:
        allowed |= MUT_FAULTS
    return allowed


class Signal(str, Enum):
    PCA = "PCA"
    IC = "IC"
    IR = "IR"
    UNION = "UNION"
    MAJORITY = "MAJORITY"


CONFLICT_SIGNALS: Tuple[Signal, ...] = (Signal.PCA, Signal.IC, Signal.IR)


class Label(str, Enum):
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"


class Verdict(str, Enum):
    CONSISTENT = "CONSISTENT"
    CONTRADICTORY = "CONTRADICTORY"
    INCOMPLETE = "INCOMPLETE"


# Surface names models use for artifacts, mapped to canonical sources.
ARTIFACT_ALIASES: Dict[str, Artifact] = {
    "javadoc": Artifact.JAVADOC,
    "docstring": Artifact.JAVADOC,
    "doc": Artifact.JAVADOC,
    "docs": Artifact.JAVADOC,
    "documentation": Artifact.JAVADOC,
    "signature": Artifact.SIGNATURE,
    "sig": Artifact.SIGNATURE,
    "method_signature": Artifact.SIGNATURE,
    "mut": Artifact.MUT,
    "method": Artifact.MUT,
    "method_under_test": Artifact.MUT,
    "implementation": Artifact.MUT,
    "code": Artifact.MUT,
    "test_prefix": Artifact.TEST_PREFIX,
    "testprefix": Artifact.TEST_PREFIX,
    "test": Artifact.TEST_PREFIX,
    "prefix": Artifact.TEST_PREFIX,
}


def normalize_artifact(name: str) -> Artifact:
    """Map a model-supplied artifact name onto the canonical source."""
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key in ARTIFACT_ALIASES:
        return ARTIFACT_ALIASES[key]
    raise ValueError(f"unknown artifact name: {name!r}")
