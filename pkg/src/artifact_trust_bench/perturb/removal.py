"""Deterministic documentation-removal transforms.

All three transforms work line by line on the raw block so that every line they
keep is byte-identical to the input.
"""

from typing import List

from ..corpus.javadoc import DocLine, empty_shell, first_tag_index, indent_of, split_lines
from ..corpus.models import ArtifactBundle
from ..types import Artifact, Variant
from .models import PerturbationRecord, ReviewStatus


def strip_description(javadoc: str) -> str:
    """Drop the prose description and keep every tag line verbatim.

    A block without tags collapses to its bare delimiters.
    """
    lines = split_lines(javadoc)
    boundary = first_tag_index(lines)
    if boundary == len(lines):
        return empty_shell(javadoc)

    opener = next((i for i, line in enumerate(lines) if line.opens), None)
    kept: List[str] = []
    if opener is not None and opener < boundary:
        head = lines[opener]
        kept.append(head.raw if not head.content else f"{indent_of(head.raw)}/**")
    kept.extend(line.raw for line in lines[boundary:])
    return "\n".join(kept)


def _closer_for(line: DocLine) -> str:
    indent = indent_of(line.raw)
    if line.raw.strip().startswith("*"):
        return f"{indent}*/"
    return f"{indent} */"


def strip_return_tag(javadoc: str) -> str:
    """Remove the ``@return`` clause and its wrapped continuation lines."""
    lines = split_lines(javadoc)
    start = next((i for i, line in enumerate(lines) if line.tag == "return"), None)
    if start is None:
        return javadoc

    closed = lines[start].closes
    end = start + 1
    while not closed and end < len(lines):
        line = lines[end]
        if line.is_tag or not line.content:
            break
        closed = line.closes
        end += 1

    replacement: List[str] = []
    if lines[start].opens:
        replacement.append(f"{indent_of(lines[start].raw)}/**")
    if closed:
        replacement.append(_closer_for(lines[end - 1]))
    raws = [line.raw for line in lines]
    return "\n".join(raws[:start] + replacement + raws[end:])


def strip_description_and_return(javadoc: str) -> str:
    return strip_return_tag(strip_description(javadoc))


_REMOVALS = {
    Variant.DOC_DESC_REMOVED: (
        strip_description,
        "Javadoc prose description removed; tags retained.",
    ),
    Variant.DOC_RETURN_REMOVED: (
        strip_return_tag,
        "Javadoc @return clause removed.",
    ),
    Variant.DOC_DESC_RETURN_REMOVED: (
        strip_description_and_return,
        "Javadoc prose description and @return clause removed.",
    ),
}


def build_removal_records(bundle: ArtifactBundle) -> List[PerturbationRecord]:
    """The three removal variants of one bundle, in variant order."""
    records: List[PerturbationRecord] = []
    for variant, (transform, summary) in _REMOVALS.items():
        records.append(
            PerturbationRecord.from_bundle(
                bundle,
                variant=variant,
                javadoc=transform(bundle.javadoc),
                affected_artifacts=[Artifact.JAVADOC],
                ground_truth_summary=summary,
                change_description=f"Deterministic transform {transform.__name__}.",
                review_status=ReviewStatus.NOT_REQUIRED,
            )
        )
    return records
