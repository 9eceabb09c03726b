"""Conservative automated filtering of candidate bundles."""

import logging
from typing import List, Set, Tuple

from .javadoc import parse_javadoc
from .models import ArtifactBundle, CurationVerdict
from .rules import (
    MAX_EXECUTABLE_LINES,
    MIN_EXECUTABLE_LINES,
    MIN_JAVADOC_CHARS,
    MIN_TEST_PREFIX_CHARS,
    RULE_DUPLICATE,
    RULE_EXTRACTION_ARTIFACT,
    RULE_INLINE_COMMENT,
    RULE_LINE_COUNT,
    RULE_REPEATED_NAME,
    RULE_SHORT_JAVADOC,
    RULE_SHORT_TEST_PREFIX,
    RULE_SIGNATURE,
    RULE_TRIVIAL,
    check_javadoc_rules,
    classify_triviality,
    count_executable_lines,
    extraction_artifact,
    has_inline_comment,
    method_kind_rules,
    review_flags,
)
from .signature import parse_signature

logger = logging.getLogger(__name__)


def evaluate_candidate(bundle: ArtifactBundle) -> CurationVerdict:
    """Apply every per-bundle rule (deduplication excluded)."""
    failed: List[str] = []
    lines = count_executable_lines(bundle.mut_body)
    profile = classify_triviality(bundle.mut_body)

    try:
        info = parse_signature(bundle.signature) if bundle.signature.strip() else None
    except ValueError:
        info = None
    if info is None:
        failed.append(RULE_SIGNATURE)
    else:
        failed.extend(method_kind_rules(info, bundle.mut_body, profile))

    if not MIN_EXECUTABLE_LINES <= lines <= MAX_EXECUTABLE_LINES:
        failed.append(RULE_LINE_COUNT)
    if not profile.nontrivial:
        failed.append(RULE_TRIVIAL)
    if has_inline_comment(bundle.mut_body):
        failed.append(RULE_INLINE_COMMENT)
    if extraction_artifact(bundle.javadoc, bundle.mut_body):
        failed.append(RULE_EXTRACTION_ARTIFACT)
    if len(bundle.javadoc.strip()) < MIN_JAVADOC_CHARS:
        failed.append(RULE_SHORT_JAVADOC)
    failed.extend(check_javadoc_rules(bundle.javadoc, bundle.signature))
    if len(bundle.test_prefix.strip()) < MIN_TEST_PREFIX_CHARS:
        failed.append(RULE_SHORT_TEST_PREFIX)

    return CurationVerdict(
        sample_id=bundle.sample_id,
        accepted=not failed,
        failed_rules=failed,
        executable_line_count=lines,
        control_flow_count=profile.control_flow_count,
        assignment_count=profile.assignment_count,
        call_count=profile.call_count,
        description_length=len(parse_javadoc(bundle.javadoc).description),
        review_flags=review_flags(bundle.javadoc, bundle.mut_body),
    )


def curate(
    candidates: List[ArtifactBundle],
) -> Tuple[List[ArtifactBundle], List[CurationVerdict]]:
    """Filter candidates down to the clean base dataset.

    Candidates are processed in the given order; among bundles sharing the same
    (mut_body, javadoc) pair only the first one that passes every other rule is
    kept, and within one source file only the first accepted method of a given
    name survives. Returns the accepted bundles and one verdict per candidate.
    """
    accepted: List[ArtifactBundle] = []
    verdicts: List[CurationVerdict] = []
    seen: Set[Tuple[str, str]] = set()
    names: Set[str] = set()

    for bundle in candidates:
        verdict = evaluate_candidate(bundle)
        pair = (bundle.mut_body, bundle.javadoc)
        if verdict.accepted and pair in seen:
            verdict = verdict.model_copy(
                update={"accepted": False, "failed_rules": [RULE_DUPLICATE]}
            )
        elif verdict.accepted and "::" in bundle.origin and bundle.origin in names:
            verdict = verdict.model_copy(
                update={"accepted": False, "failed_rules": [RULE_REPEATED_NAME]}
            )
        if verdict.accepted:
            seen.add(pair)
            names.add(bundle.origin)
            accepted.append(bundle)
        verdicts.append(verdict)

    logger.info(f"Curated {len(candidates)} candidates: {len(accepted)} accepted")
    return accepted, verdicts
