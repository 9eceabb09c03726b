"""The fixed system prompt, the blind user prompt and the provenance leak scanner."""

import hashlib
import logging
from typing import Dict, Iterable, List, Mapping, Tuple, Union

from ..corpus.models import ArtifactBundle
from ..errors import LeakAbort
from ..perturb.models import PerturbationRecord
from ..sections import render_sections
from ..types import Artifact, Variant

logger = logging.getLogger(__name__)

SYSTEM_PROMPT = """You are an expert software engineer assessing the quality and mutual \
consistency of four code artifacts. Respond with ONLY a single valid JSON object.

Output constraints:
- The entire response is one JSON object that starts with { and ends with }.
- No markdown fences, no <think> or other tags, no text before or after the object.
- Escape quotes, backslashes, newlines and tabs inside strings.

Artifacts: Javadoc, Signature, MUT (method under test), Test Prefix.

Perspective:
- No artifact is ground truth a priori. Do not assume the MUT is right because it runs,
  or the Javadoc because it is documentation. Do not treat the test prefix as ground truth.
- Cross-validate every artifact against the others.

Procedure: extract the semantic claims of each artifact, compare every pair, reason across
all four, identify aligned and divergent artifacts, then report anomalies and inconsistencies.

Scoring: every score is in [0.00, 1.00] with two decimals. Labels: LOW (0.00-0.39),
MEDIUM (0.40-0.69), HIGH (0.70-1.00).

The object has exactly these six components:
{
  "assessment": {
    "javadoc": {"score": 0.00, "label": "LOW|MEDIUM|HIGH", "evidence": "..."},
    "signature": {...}, "mut": {...}, "test_prefix": {...}, "overall": {...}
  },
  "prioritization": {"ranking": [
    {"source": "JAVADOC|SIGNATURE|MUT|TEST_PREFIX", "confidence": 0.00}, ... all four,
    most reliable first ]},
  "consistency": {
    "pairwise": {
      "javadoc_signature": {"verdict": "CONSISTENT|CONTRADICTORY|INCOMPLETE",
                            "explanation": "..."},
      "javadoc_mut": {...}, "javadoc_test_prefix": {...}, "signature_mut": {...},
      "signature_test_prefix": {...}, "mut_test_prefix": {...}
    },
    "identified_conflicts": [{"artifacts": ["JAVADOC", "MUT"], "description": "..."}],
    "inconsistency": {"has_inconsistency": true, "affected_artifacts": ["..."],
                      "description": "..."},
    "anomaly": {"flag": false, "description": "..."},
    "behavioral_hypothesis": "the most defensible account of the intended behavior"
  },
  "metadata": {"assumptions": "...", "limitations": "...", "uncertainty": "..."},
  "overall_confidence": 0.00
}

Source prioritization is a total order over JAVADOC, SIGNATURE, MUT and TEST_PREFIX by
reliability for understanding the intended behavior. Handle missing documentation, trivial
methods, minimal test prefixes and fully consistent bundles explicitly."""

USER_TEMPLATE = (
    "Assess the following artifact bundle.\n\n{sections}\n\nRespond with the JSON object only."
)

PromptRecord = Union[ArtifactBundle, PerturbationRecord]


def prompt_hashes() -> Dict[str, str]:
    return {
        "system_prompt": hashlib.sha256(SYSTEM_PROMPT.encode()).hexdigest(),
        "user_template": hashlib.sha256(USER_TEMPLATE.encode()).hexdigest(),
    }


def _artifact_texts(record: PromptRecord) -> Dict[Artifact, str]:
    return {
        Artifact.JAVADOC: record.javadoc,
        Artifact.SIGNATURE: record.signature,
        Artifact.MUT: record.mut_body,
        Artifact.TEST_PREFIX: record.test_prefix,
    }


def provenance_tokens(record: PerturbationRecord) -> List[str]:
    """Strings that would reveal how a record was made."""
    tokens = [record.variant.value]
    for value in (record.severity, record.strategy, record.fault_category):
        if value is not None:
            tokens.append(value.value)
    for text in (record.ground_truth_summary, record.change_description):
        if text.strip():
            tokens.append(text.strip())
    return tokens


def find_leaks(record: PerturbationRecord, user: str) -> List[str]:
    """Provenance tokens occurring more often in ``user`` than in the artifacts themselves."""
    artifacts = "\n".join(_artifact_texts(record).values())
    return [t for t in provenance_tokens(record) if user.count(t) > artifacts.count(t)]


def render_blind_prompt(record: PromptRecord) -> Tuple[str, str]:
    """(system, user) for one matrix cell.

    Raises LeakAbort when the rendered user text carries provenance.
    """
    user = USER_TEMPLATE.format(sections=render_sections(_artifact_texts(record)))
    if isinstance(record, PerturbationRecord):
        leaks = find_leaks(record, user)
        if leaks:
            raise LeakAbort(
                f"user prompt for {record.variant.value}|{record.sample_id} leaks provenance",
                {"sample_id": record.sample_id, "tokens": leaks},
            )
    return SYSTEM_PROMPT, user


def scan_for_leaks(
    datasets: Mapping[Variant, Iterable[PerturbationRecord]],
) -> List[Dict[str, object]]:
    """Re-render every user prompt of the matrix and report provenance leaks."""
    findings: List[Dict[str, object]] = []
    scanned = 0
    for variant, records in datasets.items():
        for record in records:
            scanned += 1
            user = USER_TEMPLATE.format(sections=render_sections(_artifact_texts(record)))
            for token in find_leaks(record, user):
                findings.append(
                    {"sample_id": record.sample_id, "variant": variant.value, "token": token}
                )
    logger.info(f"Leak scan: {scanned} prompts, {len(findings)} findings")
    return findings
