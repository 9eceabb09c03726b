"""Tests for the offline reference auditor."""

import math

import pytest

from artifact_trust_bench.auditor import (
    AuditorEndpoint,
    AuditorMode,
    AuditorProfile,
    MalformedKind,
    oracle_trace,
    provenance_index,
)
from artifact_trust_bench.config import AuditorPolicy, EndpointProfile
from artifact_trust_bench.errors import ConfigError, PermanentRefusal
from artifact_trust_bench.harness import ChatRequest
from artifact_trust_bench.trace import derive_signals, repair_raw_output, validate_trace
from artifact_trust_bench.types import CONFLICT_SIGNALS, Severity, Signal, Strategy, Variant

ORACLE = AuditorProfile()
POLICY = AuditorPolicy()


def _signals(record, profile=ORACLE):
    text = repair_raw_output(oracle_trace(record, profile))
    trace = validate_trace(text, record.sample_id, record.variant, "auditor")
    return trace, derive_signals(trace)


class TestLocator:
    def test_random_with_parameters(self):
        profile = AuditorProfile.from_locator("auditor://random?p_flag=0.2&seed=7")
        assert profile.mode is AuditorMode.RANDOM
        assert profile.p_flag == 0.2
        assert profile.seed == 7

    def test_malformed_kind(self):
        profile = AuditorProfile.from_locator("auditor://malformed?kind=bad-escape")
        assert profile.kind is MalformedKind.BAD_ESCAPE

    def test_policy_is_carried(self):
        policy = AuditorPolicy(base_score=0.8)
        assert AuditorProfile.from_locator("auditor://oracle", policy).policy is policy

    @pytest.mark.parametrize(
        "locator",
        [
            "http://localhost:8000/v1",
            "auditor://clairvoyant",
            "auditor://random?p_flag=1.5",
            "auditor://random?seed=abc",
            "auditor://malformed",
            "auditor://oracle?kind=truncated",
        ],
    )
    def test_invalid_locators(self, locator):
        with pytest.raises(ConfigError):
            AuditorProfile.from_locator(locator)


class TestOracle:
    def test_base_is_clean(self, matrix):
        for record in matrix[Variant.BASE]:
            trace, signals = _signals(record)
            assert not signals.union_fires
            assert trace.assessment.scores() == pytest.approx(
                {d: POLICY.base_score for d in trace.assessment.scores()}
            )
            assert trace.overall_confidence == POLICY.confidence

    @pytest.mark.parametrize(
        "variant",
        [Variant.DOC_DESC_REMOVED, Variant.DOC_RETURN_REMOVED, Variant.DOC_DESC_RETURN_REMOVED],
    )
    def test_removals_lower_the_javadoc_without_conflict(self, matrix, variant):
        for record in matrix[variant]:
            trace, signals = _signals(record)
            assert not signals.union_fires
            assert trace.assessment.javadoc.score == pytest.approx(0.65)
            assert trace.assessment.mut.score == pytest.approx(0.85)
            pairwise = trace.consistency.pairwise
            assert pairwise.javadoc_mut.verdict.value == "INCOMPLETE"
            assert pairwise.javadoc_test_prefix.verdict.value == "INCOMPLETE"

    def test_doc_bug_fires_every_signal(self, matrix):
        for record in matrix[Variant.DOC_BUG]:
            _, signals = _signals(record)
            assert signals.pca_fires and signals.ic_fires and signals.ir_fires
            assert signals.text(Signal.IR) == record.ground_truth_summary

    def test_mut_bug_is_not_reported_as_inconsistency(self, matrix):
        for record in matrix[Variant.MUT_BUG]:
            trace, signals = _signals(record)
            assert signals.pca_fires and signals.ic_fires
            assert not signals.ir_fires
            assert [a.value for a in trace.consistency.inconsistency.affected_artifacts] == [
                "MUT"
            ]

    def test_contradiction_by_strategy(self, matrix):
        for record in matrix[Variant.CONTRADICTION]:
            _, signals = _signals(record)
            assert signals.pca_fires and signals.ic_fires
            assert signals.ir_fires is (record.strategy is not Strategy.MUT_ONLY)

    @pytest.mark.parametrize(
        "severity,expected",
        [(Severity.HEAVY, 0.50), (Severity.NORMAL, 0.65), (Severity.SUBTLE, 0.75)],
    )
    def test_severity_penalty(self, matrix, severity, expected):
        records = [r for r in matrix[Variant.MUT_BUG] if r.severity is severity]
        assert records
        for record in records:
            trace, _ = _signals(record)
            assert trace.assessment.mut.score == pytest.approx(expected)
            assert trace.assessment.overall.score == pytest.approx(expected)
            assert trace.assessment.javadoc.score == pytest.approx(0.85)

    def test_affected_artifacts_rank_last(self, matrix):
        record = matrix[Variant.DOC_BUG][0]
        trace, _ = _signals(record)
        assert trace.prioritization.order()[-1].value == "JAVADOC"


class TestRandom:
    def test_rates_near_p_flag(self, matrix):
        profile = AuditorProfile(mode=AuditorMode.RANDOM, p_flag=0.2, seed=7)
        records = [r for records in matrix.values() for r in records]
        n = len(records)
        half_width = 3.29 * math.sqrt(0.2 * 0.8 / n)
        fired = {s: 0 for s in CONFLICT_SIGNALS}
        for record in records:
            _, signals = _signals(record, profile)
            for s in CONFLICT_SIGNALS:
                fired[s] += signals.fires(s)
        for s in CONFLICT_SIGNALS:
            assert abs(fired[s] / n - 0.2) <= half_width

    def test_same_cell_same_answer(self, matrix):
        profile = AuditorProfile(mode=AuditorMode.RANDOM, p_flag=0.5, seed=3)
        record = matrix[Variant.MUT_BUG][4]
        assert oracle_trace(record, profile) == oracle_trace(record, profile)

    def test_never_and_always(self, matrix):
        never = AuditorProfile(mode=AuditorMode.RANDOM, p_flag=0.0)
        always = AuditorProfile(mode=AuditorMode.RANDOM, p_flag=1.0)
        for record in matrix[Variant.BASE][:5]:
            assert not _signals(record, never)[1].union_fires
            assert _signals(record, always)[1].majority_fires


class TestSilentAndMalformed:
    def test_silent_never_flags(self, matrix):
        profile = AuditorProfile(mode=AuditorMode.SILENT)
        for record in matrix[Variant.CONTRADICTION]:
            assert not _signals(record, profile)[1].union_fires

    @pytest.mark.parametrize("kind", list(MalformedKind))
    def test_defects_are_repairable(self, matrix, kind):
        profile = AuditorProfile(mode=AuditorMode.MALFORMED, kind=kind)
        for record in (matrix[Variant.BASE][0], matrix[Variant.DOC_BUG][0]):
            raw = oracle_trace(record, profile)
            assert raw != oracle_trace(record, ORACLE)
            _, repaired = _signals(record, profile)
            _, clean = _signals(record)
            assert repaired == clean

    def test_bad_escape_survives_as_text(self, matrix):
        profile = AuditorProfile(mode=AuditorMode.MALFORMED, kind=MalformedKind.BAD_ESCAPE)
        trace, _ = _signals(matrix[Variant.BASE][0], profile)
        assert trace.consistency.behavioral_hypothesis.startswith("Reads C:\\data\\q.txt; ")


class TestAuditorEndpoint:
    async def test_answers_known_cells(self, matrix):
        endpoint = AuditorEndpoint(
            EndpointProfile(model_id="oracle", locator="auditor://oracle"),
            provenance_index(matrix),
        )
        record = matrix[Variant.MUT_BUG][2]
        request = ChatRequest(
            model_id="oracle",
            system="s",
            user="u",
            request_id=f"oracle|MUT_BUG|{record.sample_id}",
        )
        assert await endpoint.complete(request) == oracle_trace(record, ORACLE)
        assert endpoint.calls == 1

    @pytest.mark.parametrize("request_id", ["oracle|BASE|unknown-sample", "garbage", ""])
    async def test_unknown_cells_are_refused(self, matrix, request_id):
        endpoint = AuditorEndpoint(
            EndpointProfile(model_id="oracle", locator="auditor://oracle"), {}
        )
        request = ChatRequest(model_id="oracle", system="s", user="u", request_id=request_id)
        with pytest.raises(PermanentRefusal):
            await endpoint.complete(request)
