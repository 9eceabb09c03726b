"""Tests for trace repair, validation and conflict-signal derivation."""

import copy
import itertools
import json

import numpy as np
import pytest

from artifact_trust_bench.errors import (
    BadEnumError,
    DuplicateSourceError,
    MissingFieldError,
    OutOfRangeError,
    ParseFailure,
)
from artifact_trust_bench.trace import (
    LabelBands,
    derive_signals,
    label_of,
    repair_raw_output,
    serialize_trace,
    validate_trace,
)
from artifact_trust_bench.types import Artifact, Label, Signal, Variant

from .conftest import make_trace


def _validate(payload):
    return validate_trace(payload, "Accumulator.clampSum0-0000", Variant.BASE, "oracle")


class TestRepair:
    def test_valid_object_is_only_stripped(self, clean_trace_text):
        assert repair_raw_output(f"\n  {clean_trace_text}\n") == clean_trace_text

    def test_hidden_reasoning_block(self, clean_trace, clean_trace_text):
        raw = f"<think>\nFirst compare javadoc and MUT.\n</think>\n{clean_trace_text}"
        assert json.loads(repair_raw_output(raw)) == clean_trace

    def test_markdown_fence(self, clean_trace, clean_trace_text):
        raw = f"Here is my answer:\n```json\n{clean_trace_text}\n```\n"
        assert json.loads(repair_raw_output(raw)) == clean_trace

    def test_truncated_object_is_closed(self, clean_trace, clean_trace_text):
        assert json.loads(repair_raw_output(clean_trace_text[:-1])) == clean_trace

    def test_deeper_truncation_closes_every_level(self):
        repaired = repair_raw_output('{"a": {"b": [1, 2')
        assert json.loads(repaired) == {"a": {"b": [1, 2]}}

    def test_invalid_escapes_become_literal_backslashes(self):
        repaired = repair_raw_output('{"path": "C:\\data\\q.txt"}')
        assert json.loads(repaired) == {"path": "C:\\data\\q.txt"}

    def test_trailing_comma(self):
        assert json.loads(repair_raw_output('{"a": [1, 2,], "b": 3,}')) == {"a": [1, 2], "b": 3}

    def test_trailing_prose_is_dropped(self):
        assert json.loads(repair_raw_output('{"a": 1}\nHope this helps!')) == {"a": 1}

    def test_idempotent(self, clean_trace_text):
        for raw in (clean_trace_text[:-1], f"```\n{clean_trace_text}\n```", '{"a": 1,}'):
            once = repair_raw_output(raw)
            assert repair_raw_output(once) == once

    @pytest.mark.parametrize("raw", ["", "I cannot assess this.", "[1, 2, 3]"])
    def test_nothing_to_recover(self, raw):
        with pytest.raises(ParseFailure) as exc:
            repair_raw_output(raw)
        assert exc.value.raw == raw


class TestValidate:
    def test_clean_trace(self, clean_trace):
        trace = _validate(clean_trace)
        assert trace.sample_id == "Accumulator.clampSum0-0000"
        assert trace.variant is Variant.BASE
        assert trace.model_id == "oracle"
        assert trace.warnings == []
        assert trace.prioritization.order() == [
            Artifact.JAVADOC,
            Artifact.SIGNATURE,
            Artifact.MUT,
            Artifact.TEST_PREFIX,
        ]

    def test_accepts_text(self, clean_trace_text):
        assert _validate(clean_trace_text).overall_confidence == 0.9

    def test_serialization_keeps_only_wire_keys(self, clean_trace):
        serialized = serialize_trace(_validate(clean_trace))
        assert set(serialized) == {
            "assessment",
            "prioritization",
            "consistency",
            "metadata",
            "overall_confidence",
        }
        assert _validate(serialized) == _validate(clean_trace)

    def test_unknown_top_level_keys_are_ignored(self, clean_trace):
        clean_trace["notes"] = "extra"
        assert _validate(clean_trace).overall_confidence == 0.9

    def test_missing_assessment_dimension(self, clean_trace):
        del clean_trace["assessment"]["mut"]
        with pytest.raises(MissingFieldError) as exc:
            _validate(clean_trace)
        assert exc.value.details["path"] == "assessment.mut"

    def test_missing_top_level_key(self, clean_trace):
        del clean_trace["metadata"]
        with pytest.raises(MissingFieldError):
            _validate(clean_trace)

    def test_score_out_of_range(self, clean_trace):
        clean_trace["assessment"]["javadoc"]["score"] = 1.5
        with pytest.raises(OutOfRangeError):
            _validate(clean_trace)

    def test_confidence_out_of_range(self, clean_trace):
        clean_trace["overall_confidence"] = -0.1
        with pytest.raises(OutOfRangeError):
            _validate(clean_trace)

    def test_duplicate_source(self, clean_trace):
        ranking = clean_trace["prioritization"]["ranking"]
        ranking[1]["source"] = ranking[0]["source"]
        with pytest.raises(DuplicateSourceError):
            _validate(clean_trace)

    def test_short_ranking(self, clean_trace):
        clean_trace["prioritization"]["ranking"].pop()
        with pytest.raises(MissingFieldError):
            _validate(clean_trace)

    def test_bad_label(self, clean_trace):
        clean_trace["assessment"]["overall"]["label"] = "EXCELLENT"
        with pytest.raises(BadEnumError):
            _validate(clean_trace)

    def test_bad_verdict(self, clean_trace):
        clean_trace["consistency"]["pairwise"]["mut_test_prefix"]["verdict"] = "MAYBE"
        with pytest.raises(BadEnumError):
            _validate(clean_trace)

    def test_contradiction_needs_an_explanation(self, clean_trace):
        clean_trace["consistency"]["pairwise"]["javadoc_mut"] = {
            "verdict": "CONTRADICTORY",
            "explanation": " ",
        }
        with pytest.raises(MissingFieldError):
            _validate(clean_trace)

    @pytest.mark.parametrize("description", ["", "   ", "\n\t"])
    def test_conflict_needs_a_description(self, clean_trace, description):
        clean_trace["consistency"]["identified_conflicts"] = [
            {"artifacts": ["JAVADOC", "MUT"], "description": description}
        ]
        with pytest.raises(MissingFieldError) as exc:
            _validate(clean_trace)
        assert exc.value.details["path"].endswith("description")

    def test_flagged_inconsistency_needs_affected_artifacts(self, clean_trace):
        clean_trace["consistency"]["inconsistency"] = {
            "has_inconsistency": True,
            "affected_artifacts": [],
            "description": "Something is off.",
        }
        with pytest.raises(MissingFieldError) as exc:
            _validate(clean_trace)
        assert exc.value.details["path"].endswith("affected_artifacts")

    def test_not_an_object(self):
        with pytest.raises(MissingFieldError):
            _validate("[1, 2]")

    def test_not_json(self):
        with pytest.raises(ParseFailure):
            _validate("{not json")

    def test_case_and_alias_normalization(self, clean_trace):
        clean_trace["assessment"]["mut"]["label"] = "high"
        clean_trace["consistency"]["inconsistency"] = {
            "has_inconsistency": True,
            "affected_artifacts": ["docstring", "method"],
            "description": "The bound differs.",
        }
        trace = _validate(clean_trace)
        assert trace.assessment.mut.label is Label.HIGH
        assert trace.consistency.inconsistency.affected_artifacts == [
            Artifact.JAVADOC,
            Artifact.MUT,
        ]

    def test_label_disagreement_is_a_warning(self, clean_trace):
        clean_trace["assessment"]["signature"] = {
            "score": 0.3,
            "label": "HIGH",
            "evidence": "Unclear.",
        }
        trace = _validate(clean_trace)
        assert len(trace.warnings) == 1
        assert trace.warnings[0].startswith("signature: label HIGH")


class TestLabelBands:
    @pytest.mark.parametrize(
        "score,label",
        [(0.0, Label.LOW), (0.39, Label.LOW), (0.4, Label.MEDIUM), (0.69, Label.MEDIUM),
         (0.7, Label.HIGH), (1.0, Label.HIGH)],
    )
    def test_default_bands(self, score, label):
        assert label_of(score) is label

    def test_custom_bands(self):
        bands = LabelBands(medium=0.5, high=0.9)
        assert label_of(0.85, bands) is Label.MEDIUM

    def test_bands_must_be_ordered(self):
        with pytest.raises(ValueError):
            LabelBands(medium=0.8, high=0.6)

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            label_of(1.01)


class TestSignals:
    @pytest.mark.parametrize("pca,ic,ir", list(itertools.product([False, True], repeat=3)))
    def test_truth_table(self, pca, ic, ir):
        signals = derive_signals(_validate(make_trace(pca=pca, ic=ic, ir=ir)))
        assert signals.fires(Signal.PCA) is pca
        assert signals.fires(Signal.IC) is ic
        assert signals.fires(Signal.IR) is ir
        assert signals.fires(Signal.UNION) is (pca or ic or ir)
        assert signals.fires(Signal.MAJORITY) is (pca + ic + ir >= 2)

    def test_conflict_must_pair_javadoc_with_mut(self, clean_trace):
        clean_trace["consistency"]["identified_conflicts"] = [
            {"artifacts": ["JAVADOC", "SIGNATURE"], "description": "Parameter names differ."}
        ]
        assert not derive_signals(_validate(clean_trace)).ic_fires

    def test_report_must_name_javadoc_and_mut(self, clean_trace):
        clean_trace["consistency"]["inconsistency"] = {
            "has_inconsistency": True,
            "affected_artifacts": ["JAVADOC"],
            "description": "The Javadoc is vague.",
        }
        assert not derive_signals(_validate(clean_trace)).ir_fires

    def test_incomplete_is_not_contradictory(self, clean_trace):
        clean_trace["consistency"]["pairwise"]["javadoc_mut"] = {
            "verdict": "INCOMPLETE",
            "explanation": "The return value is undocumented.",
        }
        assert not derive_signals(_validate(clean_trace)).pca_fires

    def test_texts_of_fired_signals(self):
        signals = derive_signals(_validate(make_trace(pca=True, ir=True)))
        assert signals.text(Signal.PCA) == "The Javadoc promises a different bound."
        assert signals.text(Signal.IC) == ""
        assert signals.combined_text() == (
            "The Javadoc promises a different bound. The method stops one element early."
        )

    def test_random_traces_respect_union_and_majority(self, clean_trace):
        rng = np.random.default_rng(20240607)
        others = ["SIGNATURE", "TEST_PREFIX"]
        for _ in range(1000):
            pca, ic, ir, decoy = (bool(x) for x in rng.random(4) < 0.5)
            trace = make_trace(pca=pca, ic=ic, ir=ir)
            if decoy:
                trace["consistency"]["identified_conflicts"].append(
                    {"artifacts": ["MUT", str(rng.choice(others))], "description": "Decoy."}
                )
            if not ir and decoy:
                trace["consistency"]["inconsistency"] = {
                    "has_inconsistency": True,
                    "affected_artifacts": ["MUT"],
                    "description": "Only the MUT looks odd.",
                }
            signals = derive_signals(_validate(copy.deepcopy(trace)))
            assert (signals.pca_fires, signals.ic_fires, signals.ir_fires) == (pca, ic, ir)
            if signals.ir_fires:
                assert signals.union_fires
            if signals.majority_fires:
                assert signals.union_fires
            assert signals.union_fires == (pca or ic or ir)
