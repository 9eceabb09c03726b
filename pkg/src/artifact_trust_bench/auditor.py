"""Offline reference auditor.

A chat endpoint that answers from ground-truth provenance instead of a model.
It speaks the same request/response contract as :class:`HttpChatEndpoint`, so
the harness cannot tell the two apart. Locators:

- ``auditor://oracle``: a perfect judge under the configured score policy
- ``auditor://random?p_flag=0.2&seed=7``: each conflict signal fires independently
- ``auditor://silent``: never flags anything
- ``auditor://malformed?kind=truncated``: an oracle trace wrapped in a repairable defect

Any mode accepts ``delay=<seconds>``. Mutation requests (request ids starting
with ``mutate:``) are answered with canned lexical mutations in every mode.
"""

import asyncio
import hashlib
import json
import logging
import re
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Pattern, Tuple

import httpx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import AuditorPolicy, EndpointProfile
from .corpus.javadoc import first_tag_index, indent_of, split_lines
from .corpus.lexer import scrub
from .errors import ConfigError, PermanentRefusal
from .harness.endpoints import ChatEndpoint, ChatRequest
from .harness.store import RunKey
from .perturb.models import MutationCondition, PerturbationRecord
from .perturb.mutation import REPLY_KEYS, parse_mutation_request_id
from .sections import parse_sections
from .trace.validate import label_of
from .types import SOURCES, Artifact, FaultCategory, Severity, Variant

logger = logging.getLogger(__name__)

ProvenanceIndex = Mapping[Tuple[Variant, str], PerturbationRecord]


class AuditorMode(str, Enum):
    ORACLE = "oracle"
    RANDOM = "random"
    SILENT = "silent"
    MALFORMED = "malformed"


class MalformedKind(str, Enum):
    TAG_PREFIXED = "tag-prefixed"
    TRUNCATED = "truncated"
    BAD_ESCAPE = "bad-escape"


class AuditorProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: AuditorMode = AuditorMode.ORACLE
    p_flag: float = Field(default=0.5, ge=0.0, le=1.0)
    seed: int = 0
    kind: Optional[MalformedKind] = None
    delay: float = Field(default=0.0, ge=0.0)
    policy: AuditorPolicy = AuditorPolicy()

    @model_validator(mode="after")
    def _kind_for_malformed(self) -> "AuditorProfile":
        if (self.mode is AuditorMode.MALFORMED) != (self.kind is not None):
            raise ValueError("kind is required for malformed mode and only for it")
        return self

    @classmethod
    def from_locator(
        cls, locator: str, policy: Optional[AuditorPolicy] = None
    ) -> "AuditorProfile":
        url = httpx.URL(locator)
        if url.scheme != "auditor":
            raise ConfigError(f"not an auditor locator: {locator}")
        params = dict(url.params)
        try:
            return cls(
                mode=AuditorMode(url.host),
                p_flag=float(params.get("p_flag", 0.5)),
                seed=int(params.get("seed", 0)),
                kind=MalformedKind(params["kind"]) if "kind" in params else None,
                delay=float(params.get("delay", 0.0)),
                policy=policy or AuditorPolicy(),
            )
        except ValueError as e:
            raise ConfigError(f"invalid auditor locator {locator}: {e}") from None


# trace construction


def _entry(score: float, evidence: str) -> Dict[str, Any]:
    score = round(min(max(score, 0.0), 1.0), 2)
    return {"score": score, "label": label_of(score).value, "evidence": evidence}


def _ranking(least_reliable: List[Artifact], confidence: float) -> List[Dict[str, Any]]:
    order = [a for a in SOURCES if a not in least_reliable] + [
        a for a in SOURCES if a in least_reliable
    ]
    return [
        {"source": a.value, "confidence": round(max(confidence - 0.1 * i, 0.0), 2)}
        for i, a in enumerate(order)
    ]


def _pairwise(overrides: Mapping[str, Tuple[str, str]]) -> Dict[str, Dict[str, str]]:
    keys = (
        "javadoc_signature",
        "javadoc_mut",
        "javadoc_test_prefix",
        "signature_mut",
        "signature_test_prefix",
        "mut_test_prefix",
    )
    pairs = {k: {"verdict": "CONSISTENT", "explanation": "The two artifacts agree."} for k in keys}
    for key, (verdict, explanation) in overrides.items():
        pairs[key] = {"verdict": verdict, "explanation": explanation}
    return pairs


def _trace(
    scores: Mapping[str, float],
    evidence: Mapping[str, str],
    ranking: List[Dict[str, Any]],
    pairwise: Dict[str, Dict[str, str]],
    conflicts: List[Dict[str, Any]],
    affected: List[Artifact],
    description: str,
    hypothesis: str,
    confidence: float,
) -> Dict[str, Any]:
    flagged = bool(affected)
    return {
        "assessment": {
            dim: _entry(scores[dim], evidence.get(dim, "No issues observed."))
            for dim in ("javadoc", "signature", "mut", "test_prefix", "overall")
        },
        "prioritization": {"ranking": ranking},
        "consistency": {
            "pairwise": pairwise,
            "identified_conflicts": conflicts,
            "inconsistency": {
                "has_inconsistency": flagged,
                "affected_artifacts": [a.value for a in SOURCES if a in affected],
                "description": description if flagged else "",
            },
            "anomaly": {"flag": flagged, "description": description if flagged else ""},
            "behavioral_hypothesis": hypothesis,
        },
        "metadata": {
            "assumptions": "The four artifacts belong to the same method.",
            "limitations": "Judged from the artifact text alone.",
            "uncertainty": "",
        },
        "overall_confidence": confidence,
    }


_DIMENSION = {
    Artifact.JAVADOC: "javadoc",
    Artifact.SIGNATURE: "signature",
    Artifact.MUT: "mut",
    Artifact.TEST_PREFIX: "test_prefix",
}
_CLEAN_HYPOTHESIS = "The method behaves as its Javadoc describes."


def _clean_trace(policy: AuditorPolicy) -> Dict[str, Any]:
    scores = {dim: policy.base_score for dim in _DIMENSION.values()}
    scores["overall"] = policy.base_score
    return _trace(
        scores,
        evidence={},
        ranking=_ranking([], policy.confidence),
        pairwise=_pairwise({}),
        conflicts=[],
        affected=[],
        description="",
        hypothesis=_CLEAN_HYPOTHESIS,
        confidence=policy.confidence,
    )


def _oracle(record: PerturbationRecord, policy: AuditorPolicy) -> Dict[str, Any]:
    """Perfect-judge payload.

    The reported inconsistency lists MUT whenever JAVADOC is affected, even when
    only the Javadoc was mutated: a wrong Javadoc contradicts the MUT it describes.
    """
    base = policy.base_score
    scores = {dim: base for dim in _DIMENSION.values()}
    scores["overall"] = base
    confidence = policy.confidence

    if record.variant is Variant.BASE:
        return _clean_trace(policy)

    if record.variant.is_removal:
        scores["javadoc"] = base - policy.removal_penalty
        gap = "The Javadoc omits behavior that the MUT implements."
        return _trace(
            scores,
            {"javadoc": gap},
            _ranking([Artifact.JAVADOC], confidence),
            _pairwise(
                {"javadoc_mut": ("INCOMPLETE", gap), "javadoc_test_prefix": ("INCOMPLETE", gap)}
            ),
            [],
            [],
            "",
            _CLEAN_HYPOTHESIS,
            confidence,
        )

    summary = record.ground_truth_summary
    penalty = policy.penalty(record.severity)
    for artifact in record.affected_artifacts:
        scores[_DIMENSION[artifact]] = base - penalty
    scores["overall"] = base - penalty
    affected = list(record.affected_artifacts)
    if Artifact.JAVADOC in affected and Artifact.MUT not in affected:
        affected.append(Artifact.MUT)
    return _trace(
        scores,
        {_DIMENSION[a]: summary for a in record.affected_artifacts},
        _ranking(list(record.affected_artifacts), confidence),
        _pairwise({"javadoc_mut": ("CONTRADICTORY", summary)}),
        [{"artifacts": [Artifact.JAVADOC.value, Artifact.MUT.value], "description": summary}],
        affected,
        summary,
        "The original intent is the behavior described before the fault: " + summary,
        confidence,
    )


def _random_fires(seed: int, key: str, p_flag: float) -> Tuple[bool, bool, bool]:
    digest = hashlib.sha256(f"{seed}:{key}".encode()).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    pca, ic, ir = (rng.random(3) < p_flag).tolist()
    return bool(pca), bool(ic), bool(ir)


def _random(record: PerturbationRecord, profile: AuditorProfile) -> Dict[str, Any]:
    policy = profile.policy
    pca, ic, ir = _random_fires(
        profile.seed, f"{record.variant.value}|{record.sample_id}", profile.p_flag
    )
    trace = _clean_trace(policy)
    consistency = trace["consistency"]
    if pca:
        consistency["pairwise"]["javadoc_mut"] = {
            "verdict": "CONTRADICTORY",
            "explanation": "The Javadoc and the MUT appear to disagree.",
        }
    if ic:
        consistency["identified_conflicts"] = [
            {
                "artifacts": [Artifact.JAVADOC.value, Artifact.MUT.value],
                "description": "The documented behavior differs from the implementation.",
            }
        ]
    if ir:
        description = "The Javadoc and the MUT describe different behavior."
        consistency["inconsistency"] = {
            "has_inconsistency": True,
            "affected_artifacts": [Artifact.JAVADOC.value, Artifact.MUT.value],
            "description": description,
        }
    return trace


def _malform(text: str, kind: MalformedKind) -> str:
    if kind is MalformedKind.TAG_PREFIXED:
        return f"<think>\nCompare the artifacts pairwise first.\n</think>\n{text}"
    if kind is MalformedKind.TRUNCATED:
        return text[:-1]
    marker = '"behavioral_hypothesis": "'
    return text.replace(marker, marker + "Reads C:\\data\\q.txt; ", 1)


def oracle_trace(record: PerturbationRecord, profile: AuditorProfile) -> str:
    """Raw completion text for one matrix cell."""
    if profile.mode is AuditorMode.SILENT:
        payload = _clean_trace(profile.policy)
    elif profile.mode is AuditorMode.RANDOM:
        payload = _random(record, profile)
    else:
        payload = _oracle(record, profile.policy)
    text = json.dumps(payload)
    if profile.kind is not None:
        text = _malform(text, profile.kind)
    return text


# canned mutations

_Edit = Tuple[Pattern[str], Callable[[str], str], FaultCategory, str]

_FLIP = {"<=": "<", "<": "<=", ">=": ">", ">": ">=", "==": "!=", "!=": "==", "&&": "||", "||": "&&"}

_MUT_EDITS: Dict[str, _Edit] = {
    "null-check": (
        re.compile(r"(==|!=)(?=\s*null\b)"),
        lambda op: _FLIP[op],
        FaultCategory.NULL_CHECK,
        "inverts a null check",
    ),
    "logic": (
        re.compile(r"(?<=\s)(&&|\|\|)(?=\s)"),
        lambda op: _FLIP[op],
        FaultCategory.LOGIC,
        "swaps a logical operator",
    ),
    "equality": (
        re.compile(r"(?<=\s)(==|!=)(?=\s)"),
        lambda op: _FLIP[op],
        FaultCategory.LOGIC,
        "inverts an equality test",
    ),
    "boundary": (
        re.compile(r"(?<=\s)(<=|>=|<|>)(?=\s)"),
        lambda op: _FLIP[op],
        FaultCategory.BOUNDARY,
        "shifts a comparison boundary",
    ),
    "literal": (
        re.compile(r"(?<![\w.])(\d+)(?![\w.])"),
        lambda n: str(int(n) + 1),
        FaultCategory.BOUNDARY,
        "shifts a numeric constant by one",
    ),
}

_MUT_ORDER: Dict[Severity, Tuple[str, ...]] = {
    Severity.HEAVY: ("null-check", "logic", "equality", "boundary", "literal"),
    Severity.NORMAL: ("boundary", "literal", "equality", "null-check", "logic"),
    Severity.SUBTLE: ("literal", "boundary", "equality", "logic", "null-check"),
}

_ANTONYMS: Tuple[Tuple[str, str], ...] = (
    ("true", "false"),
    ("first", "last"),
    ("minimum", "maximum"),
    ("smallest", "largest"),
    ("lower", "upper"),
    ("before", "after"),
    ("ascending", "descending"),
    ("positive", "negative"),
    ("greater", "less"),
    ("inclusive", "exclusive"),
    ("valid", "invalid"),
    ("enabled", "disabled"),
    ("left", "right"),
    ("start", "end"),
)
_ANTONYM = re.compile(
    r"\b(" + "|".join(w for pair in _ANTONYMS for w in pair) + r")\b", re.IGNORECASE
)
_OPPOSITE = {a: b for a, b in _ANTONYMS} | {b: a for a, b in _ANTONYMS}

_DOC_CLAUSES: Dict[Severity, Tuple[str, FaultCategory]] = {
    Severity.HEAVY: ("The result is always the input value unchanged.", FaultCategory.WRONG_RETURN),
    Severity.NORMAL: (
        "Arguments at the edge of the accepted range are rejected.",
        FaultCategory.WRONG_PARAMS,
    ),
    Severity.SUBTLE: (
        "An empty input is handled like a single element.",
        FaultCategory.WRONG_BEHAVIOR,
    ),
}


def mutate_body(mut_body: str, severity: Severity) -> Optional[Tuple[str, FaultCategory, str]]:
    """Apply the first lexical edit the severity prefers; None when nothing applies.

    Only code after the declaration's opening brace is edited, and string or
    comment contents are never touched.
    """
    code = scrub(mut_body).code
    start = code.find("{") + 1
    if start <= 0:
        return None
    for name in _MUT_ORDER[severity]:
        pattern, replace, category, wording = _MUT_EDITS[name]
        match = pattern.search(code, start)
        if match is None:
            continue
        old = mut_body[match.start() : match.end()]
        new = replace(old)
        edited = mut_body[: match.start()] + new + mut_body[match.end() :]
        return edited, category, f"The MUT {wording}: `{old}` became `{new}`."
    return None


def _line_prefix(raw: List[str]) -> str:
    """Decoration of the first continuation line, e.g. ``"     * "``."""
    for line in raw[1:]:
        stripped = line.lstrip()
        if stripped.startswith("*") and not stripped.startswith("*/"):
            return line[: line.index("*") + 1] + " "
    return indent_of(raw[0]) + " * "


def _insert_clause(javadoc: str, clause: str) -> str:
    raw = javadoc.split("\n")
    lines = split_lines(javadoc)
    if len(raw) == 1:
        end = javadoc.rfind("*/")
        if end < 0:
            return f"{javadoc} {clause}"
        return f"{javadoc[:end].rstrip()} {clause} */"
    prefix = _line_prefix(raw)
    at = first_tag_index(lines)
    if at == len(lines):
        at = len(lines) - 1 if lines[-1].closes and not lines[-1].content else len(lines)
    return "\n".join(raw[: max(at, 1)] + [prefix + clause] + raw[max(at, 1) :])


def mutate_javadoc(javadoc: str, severity: Severity) -> Tuple[str, FaultCategory, str]:
    if severity is Severity.HEAVY:
        match = _ANTONYM.search(javadoc)
        if match is not None:
            old = match.group(0)
            new = _OPPOSITE[old.lower()]
            if old[0].isupper():
                new = new.capitalize()
            edited = javadoc[: match.start()] + new + javadoc[match.end() :]
            return (
                edited,
                FaultCategory.WRONG_BEHAVIOR,
                f"The Javadoc says '{new}' where the method behaves as '{old}'.",
            )
    clause, category = _DOC_CLAUSES[severity]
    return (
        _insert_clause(javadoc, clause),
        category,
        f"The Javadoc claims behavior the method does not have: {clause}",
    )


def canned_mutation(
    javadoc: str, mut_body: str, condition: MutationCondition
) -> Dict[str, Any]:
    """A mutation reply in the shape the mutation prompt asks for."""
    reply: Dict[str, Any] = {"severity": condition.severity.value}
    summaries: List[str] = []
    category: Optional[FaultCategory] = None
    targets = condition.targets
    if Artifact.JAVADOC in targets:
        edited, category, summary = mutate_javadoc(javadoc, condition.severity)
        reply[REPLY_KEYS[Artifact.JAVADOC]] = edited
        summaries.append(summary)
    if Artifact.MUT in targets:
        edited_body = mutate_body(mut_body, condition.severity)
        if edited_body is None:
            reply[REPLY_KEYS[Artifact.MUT]] = mut_body
            category = category or FaultCategory.LOGIC
        else:
            reply[REPLY_KEYS[Artifact.MUT]], category, summary = edited_body
            summaries.append(summary)
    reply["fault_category"] = category.value if category else ""
    reply["ground_truth_summary"] = " ".join(summaries)
    reply["change_description"] = f"Lexical edit of {', '.join(a.value for a in targets)}."
    return reply


class AuditorEndpoint(ChatEndpoint):
    """Reference auditor behind the chat-completion contract."""

    def __init__(
        self,
        profile: EndpointProfile,
        provenance: ProvenanceIndex,
        policy: Optional[AuditorPolicy] = None,
    ):
        super().__init__(profile)
        self.auditor = AuditorProfile.from_locator(profile.locator, policy)
        self.provenance = provenance
        self.calls = 0

    async def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        if self.auditor.delay:
            await asyncio.sleep(self.auditor.delay)
        if request.request_id.startswith("mutate:"):
            _, condition = parse_mutation_request_id(request.request_id)
            sections = parse_sections(request.user)
            reply = canned_mutation(
                sections.get(Artifact.JAVADOC, ""), sections.get(Artifact.MUT, ""), condition
            )
            return json.dumps(reply)
        try:
            key = RunKey.parse(request.request_id)
            record = self.provenance[(key.variant, key.sample_id)]
        except (KeyError, ValueError):
            raise PermanentRefusal(
                f"auditor has no provenance for request {request.request_id!r}"
            ) from None
        return oracle_trace(record, self.auditor)


def provenance_index(
    datasets: Mapping[Variant, List[PerturbationRecord]],
) -> Dict[Tuple[Variant, str], PerturbationRecord]:
    return {(v, r.sample_id): r for v, records in datasets.items() for r in records}
