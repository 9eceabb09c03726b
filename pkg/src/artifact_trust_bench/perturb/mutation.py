"""Mutation prompts and validation of mutation replies."""

import logging
from typing import Any, Dict, List, Mapping, Optional, Tuple

from pydantic import ValidationError

from ..corpus.lexer import scrub
from ..corpus.models import ArtifactBundle
from ..errors import (
    MarkerLeak,
    MissingMetadata,
    MutationRequestError,
    NoEffectiveChange,
    SignatureChanged,
)
from ..sections import render_sections
from ..types import Artifact, FaultCategory, Severity, Strategy, Variant, allowed_faults
from .models import MutationCondition, PerturbationRecord, ReviewStatus

logger = logging.getLogger(__name__)

MARKERS: Tuple[str, ...] = ("BUG", "FIXME", "TODO", "INJECT", "MUTAT")
COMMENT_TOKENS: Tuple[str, ...] = ("//", "/*")

# Reply key carrying each mutable artifact.
REPLY_KEYS: Dict[Artifact, str] = {Artifact.JAVADOC: "javadoc", Artifact.MUT: "mut_body"}
REQUIRED_METADATA: Tuple[str, ...] = (
    "fault_category",
    "ground_truth_summary",
    "change_description",
    "severity",
)

SEVERITY_WORDING: Dict[Severity, str] = {
    Severity.HEAVY: (
        "HEAVY: introduce an explicit and readily observable contradiction that a careful "
        "reader notices on first inspection."
    ),
    Severity.NORMAL: (
        "NORMAL: the fault must manifest only under specific inputs or boundary conditions; "
        "typical inputs still behave as before."
    ),
    Severity.SUBTLE: (
        "SUBTLE: a minimal corner-case deviation, the smallest change that still makes the "
        "artifact wrong for some input."
    ),
}

MUTATION_SYSTEM_PROMPT = """You inject realistic faults into Java artifact bundles for a benchmark.
Rules:
- The method signature is held fixed. Never change the declaration, name, parameters,
  return type, modifiers or thrown exceptions.
- The mutated artifact must remain natural and realistic: no comments, markers, or formatting
  cues that reveal the change.
- Change only the artifact(s) you are asked to change.
- Reply with a single JSON object and nothing else."""

_FAMILY_TASK: Dict[Variant, str] = {
    Variant.DOC_BUG: (
        "Rewrite the Javadoc so that it documents behavior the MUT does not have. "
        "Leave the MUT untouched."
    ),
    Variant.MUT_BUG: (
        "Introduce a fault into the MUT body. Leave the Javadoc untouched; it keeps describing "
        "the intended behavior."
    ),
}

_STRATEGY_TASK: Dict[Strategy, str] = {
    Strategy.MUT_ONLY: (
        "Make the MUT contradict its Javadoc by changing the MUT only. Leave the Javadoc untouched."
    ),
    Strategy.DOCSTRING_ONLY: (
        "Make the Javadoc contradict the MUT by changing the Javadoc only. Leave the MUT untouched."
    ),
    Strategy.BOTH: (
        "Change both the Javadoc and the MUT so that they contradict each other and neither "
        "matches the original behavior."
    ),
}


def mutation_request_id(sample_id: str, condition: MutationCondition) -> str:
    strategy = condition.strategy.value if condition.strategy else "-"
    return f"mutate:{sample_id}:{condition.variant.value}:{condition.severity.value}:{strategy}"


def parse_mutation_request_id(request_id: str) -> Tuple[str, MutationCondition]:
    """Recover the sample id and condition encoded by :func:`mutation_request_id`."""
    prefix, rest = request_id.split(":", 1)
    sample_id, variant, severity, strategy = rest.rsplit(":", 3)
    if prefix != "mutate":
        raise ValueError(f"not a mutation request id: {request_id!r}")
    return sample_id, MutationCondition(
        variant=Variant(variant),
        severity=Severity(severity),
        strategy=None if strategy == "-" else Strategy(strategy),
    )


def _condition(
    variant: Variant, severity: Severity, strategy: Optional[Strategy]
) -> MutationCondition:
    try:
        return MutationCondition(variant=variant, severity=severity, strategy=strategy)
    except ValidationError as e:
        raise MutationRequestError(
            f"invalid mutation request: {e.errors()[0]['msg']}",
            {"variant": getattr(variant, "value", variant), "strategy": strategy},
        ) from e


def build_mutation_request(
    bundle: ArtifactBundle,
    variant: Variant,
    severity: Severity,
    strategy: Optional[Strategy] = None,
) -> str:
    """User prompt for one mutation; the system prompt is :data:`MUTATION_SYSTEM_PROMPT`."""
    condition = _condition(variant, severity, strategy)
    task = _STRATEGY_TASK[strategy] if strategy is not None else _FAMILY_TASK[variant]
    categories = ", ".join(sorted(c.value for c in allowed_faults(variant, strategy)))
    keys = [REPLY_KEYS[a] for a in condition.targets]

    sections = render_sections(
        {
            Artifact.JAVADOC: bundle.javadoc,
            Artifact.SIGNATURE: bundle.signature,
            Artifact.MUT: bundle.mut_body,
            Artifact.TEST_PREFIX: bundle.test_prefix,
        }
    )
    reply_fields = "\n".join(
        [f'  "{key}": full replacement text,' for key in keys]
        + [
            f'  "fault_category": one of {categories},',
            '  "ground_truth_summary": one sentence naming the fault,',
            '  "change_description": what was changed and where,',
            f'  "severity": "{severity.value}"',
        ]
    )
    return (
        f"{sections}\n\n"
        f"### Task\n{task}\n"
        f"The method signature is held fixed.\n"
        f"Difficulty tier {SEVERITY_WORDING[severity]}\n"
        "The result must read like ordinary code and documentation with no comments, markers, "
        "or formatting cues.\n\n"
        f"### Reply\nReturn one JSON object:\n{{\n{reply_fields}\n}}"
    )


def declaration_of(mut_body: str) -> str:
    """Whitespace-normalized text before the body's opening brace."""
    code = scrub(mut_body).code
    brace = code.find("{")
    head = mut_body if brace < 0 else mut_body[:brace]
    return " ".join(head.split())


def _normalized(text: str) -> str:
    return " ".join(text.split())


def _marker_increase(base: str, mutated: str, tokens: Tuple[str, ...]) -> List[str]:
    base_lower, mutated_lower = base.lower(), mutated.lower()
    return [t for t in tokens if mutated_lower.count(t.lower()) > base_lower.count(t.lower())]


def validate_mutation(
    base: ArtifactBundle, reply: Mapping[str, Any], condition: MutationCondition
) -> PerturbationRecord:
    """Accept a mutation reply or raise the rejection naming it.

    Fields outside the requested artifacts keep their base values whatever the
    reply says about them.
    """
    sample_id = base.sample_id
    data = dict(reply)
    targets = condition.targets

    required = list(REQUIRED_METADATA) + [REPLY_KEYS[a] for a in targets]
    missing = [k for k in required if not isinstance(data.get(k), str) or not data[k].strip()]
    if missing:
        raise MissingMetadata(f"reply is missing {', '.join(missing)}", sample_id, data)
    try:
        category = FaultCategory(data["fault_category"].strip().upper())
    except ValueError:
        raise MissingMetadata(
            f"unknown fault_category {data['fault_category']!r}", sample_id, data
        ) from None
    if category not in allowed_faults(condition.variant, condition.strategy):
        raise MissingMetadata(
            f"fault_category {category.value} not allowed for {condition.variant.value}",
            sample_id,
            data,
        )
    if data["severity"].strip().upper() != condition.severity.value:
        raise MissingMetadata(
            f"severity {data['severity']!r} does not match requested {condition.severity.value}",
            sample_id,
            data,
        )

    mutated = {
        Artifact.JAVADOC: data["javadoc"] if Artifact.JAVADOC in targets else base.javadoc,
        Artifact.MUT: data["mut_body"] if Artifact.MUT in targets else base.mut_body,
    }
    original = {Artifact.JAVADOC: base.javadoc, Artifact.MUT: base.mut_body}

    signature = data.get("signature")
    if signature is not None and signature != base.signature:
        raise SignatureChanged("reply changed the signature field", sample_id, data)
    if declaration_of(mutated[Artifact.MUT]) != declaration_of(base.mut_body):
        raise SignatureChanged("reply changed the method declaration", sample_id, data)

    for artifact in targets:
        if _normalized(mutated[artifact]) == _normalized(original[artifact]):
            raise NoEffectiveChange(f"{artifact.value} is unchanged", sample_id, data)

    for artifact in targets:
        leaked = _marker_increase(original[artifact], mutated[artifact], MARKERS)
        if artifact is Artifact.MUT:
            leaked += _marker_increase(original[artifact], mutated[artifact], COMMENT_TOKENS)
        if leaked:
            raise MarkerLeak(
                f"{artifact.value} introduces marker(s) {', '.join(leaked)}", sample_id, data
            )

    return PerturbationRecord.from_bundle(
        base,
        variant=condition.variant,
        severity=condition.severity,
        strategy=condition.strategy,
        fault_category=category,
        affected_artifacts=targets,
        ground_truth_summary=data["ground_truth_summary"].strip(),
        change_description=data["change_description"].strip(),
        review_status=ReviewStatus.PENDING,
        javadoc=mutated[Artifact.JAVADOC],
        mut_body=mutated[Artifact.MUT],
    )
