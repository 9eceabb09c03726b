"""Shared fixtures: synthetic Java bundles, trace payloads and offline run configs."""

import copy
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import pytest

from artifact_trust_bench.archive import write_records
from artifact_trust_bench.auditor import canned_mutation
from artifact_trust_bench.config import EmbedderSettings, EndpointProfile, RunConfig
from artifact_trust_bench.corpus import ArtifactBundle
from artifact_trust_bench.perturb import (
    PerturbationRecord,
    VariantMatrix,
    assemble_variant_matrix,
    assign_conditions,
    validate_mutation,
)
from artifact_trust_bench.types import MUTATION_VARIANTS, SOURCES

BODY_TEMPLATE = """public int {name}(int[] values, int limit) {{
    if (values == null) {{
        return 0;
    }}
    int total = {start};
    int seen = 0;
    for (int i = 0; i < values.length; i++) {{
        total += values[i];
        seen++;
        if (total > limit) {{
            return limit;
        }}
    }}
    return seen == 0 ? -1 : total;
}}"""

JAVADOC_TEMPLATE = """/**
 * Adds the values in ascending index order starting from {start} and stops at the upper limit.
 *
 * @param values the numbers to add, may be null
 * @param limit the largest total that is returned
 * @return the clamped total, or -1 when values is empty
 */"""

TEST_PREFIX_TEMPLATE = """int[] data = {{1, 2, 3}};
Accumulator accumulator = new Accumulator();
int result = accumulator.{name}(data, 10);"""


def make_bundle(k: int, name: Optional[str] = None, **overrides: Any) -> ArtifactBundle:
    """A bundle that passes every curation rule; ``k`` makes it unique."""
    name = name or f"clampSum{k}"
    fields: Dict[str, Any] = {
        "sample_id": f"Accumulator.{name}-{k:04d}",
        "mut_body": BODY_TEMPLATE.format(name=name, start=k),
        "signature": f"public int {name}(int[] values, int limit)",
        "javadoc": JAVADOC_TEMPLATE.format(start=k),
        "test_prefix": TEST_PREFIX_TEMPLATE.format(name=name),
        "reference_assertion": "assertEquals(6, result);",
        "origin": f"src/Accumulator.java::{name}",
    }
    fields.update(overrides)
    return ArtifactBundle(**fields)


@pytest.fixture
def bundle() -> ArtifactBundle:
    return make_bundle(0)


@pytest.fixture
def bundles() -> List[ArtifactBundle]:
    return [make_bundle(k) for k in range(20)]


def mutated_records(bundles: List[ArtifactBundle], seed: int = 11) -> List[PerturbationRecord]:
    """Canned, validated mutations for every bundle and mutation family."""
    assignments = assign_conditions([b.sample_id for b in bundles], seed)
    records = []
    for bundle in bundles:
        for family in MUTATION_VARIANTS:
            condition = assignments[bundle.sample_id][family]
            reply = canned_mutation(bundle.javadoc, bundle.mut_body, condition)
            records.append(validate_mutation(bundle, reply, condition))
    return records


def build_matrix(bundles: List[ArtifactBundle], seed: int = 11) -> VariantMatrix:
    return assemble_variant_matrix(bundles, mutated_records(bundles, seed))


@pytest.fixture
def base_record(bundle: ArtifactBundle) -> PerturbationRecord:
    return PerturbationRecord.base(bundle)


def _entry(score: float, label: str = "HIGH", evidence: str = "Looks fine.") -> Dict[str, Any]:
    return {"score": score, "label": label, "evidence": evidence}


CLEAN_TRACE: Dict[str, Any] = {
    "assessment": {
        "javadoc": _entry(0.85),
        "signature": _entry(0.85),
        "mut": _entry(0.85),
        "test_prefix": _entry(0.85),
        "overall": _entry(0.85),
    },
    "prioritization": {
        "ranking": [
            {"source": a.value, "confidence": round(0.9 - 0.1 * i, 2)}
            for i, a in enumerate(SOURCES)
        ]
    },
    "consistency": {
        "pairwise": {
            key: {"verdict": "CONSISTENT", "explanation": "They agree."}
            for key in (
                "javadoc_signature",
                "javadoc_mut",
                "javadoc_test_prefix",
                "signature_mut",
                "signature_test_prefix",
                "mut_test_prefix",
            )
        },
        "identified_conflicts": [],
        "inconsistency": {"has_inconsistency": False, "affected_artifacts": [], "description": ""},
        "anomaly": {"flag": False, "description": ""},
        "behavioral_hypothesis": "Sums the values up to a limit.",
    },
    "metadata": {"assumptions": "", "limitations": "", "uncertainty": ""},
    "overall_confidence": 0.9,
}


def make_trace(
    pca: bool = False,
    ic: bool = False,
    ir: bool = False,
    confidence: float = 0.9,
) -> Dict[str, Any]:
    """A schema-valid trace dict with the chosen conflict signals firing."""
    trace = copy.deepcopy(CLEAN_TRACE)
    consistency = trace["consistency"]
    if pca:
        consistency["pairwise"]["javadoc_mut"] = {
            "verdict": "CONTRADICTORY",
            "explanation": "The Javadoc promises a different bound.",
        }
    if ic:
        consistency["identified_conflicts"] = [
            {"artifacts": ["JAVADOC", "MUT"], "description": "The bound check differs."}
        ]
    if ir:
        consistency["inconsistency"] = {
            "has_inconsistency": True,
            "affected_artifacts": ["JAVADOC", "MUT"],
            "description": "The method stops one element early.",
        }
    trace["overall_confidence"] = confidence
    return trace


@pytest.fixture
def matrix(bundles: List[ArtifactBundle]) -> VariantMatrix:
    return build_matrix(bundles)


@pytest.fixture
def clean_trace() -> Dict[str, Any]:
    return make_trace()


@pytest.fixture
def clean_trace_text(clean_trace: Dict[str, Any]) -> str:
    return json.dumps(clean_trace)


def offline_config(root: Path, corpus: Optional[Path] = None, **overrides: Any) -> RunConfig:
    """Two reference-auditor models and the hashing embedder; no network."""
    fields: Dict[str, Any] = {
        "corpus": corpus,
        "output_root": root / "run",
        "seed": 11,
        "models": [
            EndpointProfile(model_id="oracle", locator="auditor://oracle", concurrency=4),
            EndpointProfile(
                model_id="random", locator="auditor://random?p_flag=0.2&seed=7", concurrency=3
            ),
        ],
        "embedder": EmbedderSettings(backend="hashing"),
    }
    fields.update(overrides)
    return RunConfig(**fields)


@pytest.fixture
def corpus_file(tmp_path: Path, bundles: List[ArtifactBundle]) -> Path:
    path = tmp_path / "candidates.jsonl"
    write_records(path, bundles)
    return path


@pytest.fixture
def run_config(tmp_path: Path, corpus_file: Path) -> RunConfig:
    return offline_config(tmp_path, corpus_file)
