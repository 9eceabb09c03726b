"""Tests for the blind elicitation runner: concurrency, resume, ledgers and drift."""

import asyncio
from typing import Dict, List, Optional

import pytest

from artifact_trust_bench.auditor import provenance_index
from artifact_trust_bench.config import EndpointProfile
from artifact_trust_bench.errors import (
    PermanentRefusal,
    PromptDriftError,
    TransientEndpointError,
)
from artifact_trust_bench.harness import (
    ChatEndpoint,
    ChatRequest,
    RunKey,
    TraceStore,
    check_manifest,
    open_endpoint,
    run_matrix,
    scan_for_leaks,
)
from artifact_trust_bench.harness import runner as runner_module
from artifact_trust_bench.harness.store import TRACES_FILE
from artifact_trust_bench.perturb import PerturbationRecord
from artifact_trust_bench.types import Artifact, FaultCategory, Severity, Variant

ORACLE = EndpointProfile(model_id="oracle", locator="auditor://oracle", concurrency=4)
RANDOM = EndpointProfile(
    model_id="random", locator="auditor://random?p_flag=0.2&seed=7", concurrency=3
)


async def no_sleep(delay: float) -> None:
    return None


class Instrumented(ChatEndpoint):
    """Wraps an endpoint, tracks in-flight calls and can die after N calls."""

    def __init__(self, inner: ChatEndpoint, fail_after: Optional[int] = None):
        super().__init__(inner.profile)
        self.inner = inner
        self.fail_after = fail_after
        self.calls = 0
        self.in_flight = 0
        self.max_in_flight = 0

    async def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        if self.fail_after is not None and self.calls > self.fail_after:
            raise RuntimeError("worker killed")
        self.in_flight += 1
        self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            await asyncio.sleep(0.001)
            return await self.inner.complete(request)
        finally:
            self.in_flight -= 1


class Scripted(ChatEndpoint):
    """Replays a script of outcomes per request id, then defers to ``inner``."""

    def __init__(self, inner: ChatEndpoint, script: Dict[str, List[object]]):
        super().__init__(inner.profile)
        self.inner = inner
        self.script = script

    async def complete(self, request: ChatRequest) -> str:
        queue = self.script.get(request.request_id, [])
        if queue:
            outcome = queue.pop(0)
            if isinstance(outcome, Exception):
                raise outcome
            return str(outcome)
        return await self.inner.complete(request)


def _endpoints(matrix, *profiles: EndpointProfile) -> List[ChatEndpoint]:
    index = provenance_index(matrix)
    return [open_endpoint(p, index) for p in profiles]


def _key_id(model_id: str, variant: Variant, sample_id: str) -> str:
    return RunKey(model_id, variant, sample_id).as_id()


class TestRunMatrix:
    async def test_full_matrix(self, tmp_path, matrix):
        store = TraceStore(tmp_path)
        endpoints = _endpoints(matrix, ORACLE, RANDOM)
        summary = await run_matrix(endpoints, matrix, store, sleep=no_sleep)
        assert summary.attempted == 280
        assert summary.succeeded == 280
        assert summary.failed == 0
        assert len(store) == 280
        stored = store.get(RunKey("oracle", Variant.MUT_BUG, matrix[Variant.MUT_BUG][0].sample_id))
        assert stored is not None
        assert stored.provenance["variant"] == "MUT_BUG"
        assert stored.bundle["mut_body"] == matrix[Variant.MUT_BUG][0].mut_body
        assert not stored.repaired

    async def test_limit_takes_the_first_samples_per_variant(self, tmp_path, matrix):
        store = TraceStore(tmp_path)
        summary = await run_matrix(
            _endpoints(matrix, ORACLE), matrix, store, sleep=no_sleep, limit=5
        )
        assert summary.attempted == 7 * 5
        first = {r.sample_id for r in matrix[Variant.BASE][:5]}
        assert {t.sample_id for t in store.iter_traces()} == first

    async def test_concurrency_bound_per_endpoint(self, tmp_path, matrix):
        oracle, random = (Instrumented(e) for e in _endpoints(matrix, ORACLE, RANDOM))
        await run_matrix([oracle, random], matrix, TraceStore(tmp_path), sleep=no_sleep)
        assert 1 < oracle.max_in_flight <= 4
        assert 1 < random.max_in_flight <= 3

    async def test_kill_and_resume(self, tmp_path, matrix):
        oracle, random = _endpoints(matrix, ORACLE, RANDOM)
        dying = Instrumented(oracle, fail_after=50)
        with pytest.raises(RuntimeError, match="worker killed"):
            await run_matrix([dying, random], matrix, TraceStore(tmp_path), sleep=no_sleep)

        partial = len(TraceStore(tmp_path))
        assert 0 < partial < 280

        store = TraceStore(tmp_path)
        summary = await run_matrix(
            _endpoints(matrix, ORACLE, RANDOM), matrix, store, sleep=no_sleep
        )
        assert summary.skipped == partial
        assert summary.succeeded == 280 - partial
        assert len(store) == 280

        lines = (tmp_path / TRACES_FILE).read_text(encoding="utf-8").splitlines()
        keys = [t.key.as_id() for t in TraceStore(tmp_path).iter_traces()]
        assert len(lines) == 280
        assert len(set(keys)) == 280
        assert scan_for_leaks(matrix) == []

    async def test_second_run_skips_everything(self, tmp_path, matrix):
        await run_matrix(_endpoints(matrix, ORACLE), matrix, TraceStore(tmp_path), sleep=no_sleep)
        summary = await run_matrix(
            _endpoints(matrix, ORACLE), matrix, TraceStore(tmp_path), sleep=no_sleep
        )
        assert summary.attempted == 0
        assert summary.skipped == 140

    async def test_permanent_refusal_is_not_retried_on_resume(self, tmp_path, matrix):
        sample_id = matrix[Variant.BASE][3].sample_id
        key_id = _key_id("oracle", Variant.BASE, sample_id)
        (oracle,) = _endpoints(matrix, ORACLE)
        refusing = Scripted(oracle, {key_id: [PermanentRefusal("HTTP 413: input too large")]})

        store = TraceStore(tmp_path)
        summary = await run_matrix([refusing], matrix, store, sleep=no_sleep)
        assert summary.failed == 1
        assert summary.failures_by_cause == {"PERMANENT_REFUSAL": 1}
        assert list(store.open_failures()) == [key_id]

        (oracle,) = _endpoints(matrix, ORACLE)
        watched = Instrumented(oracle)
        store = TraceStore(tmp_path)
        summary = await run_matrix([watched], matrix, store, sleep=no_sleep)
        assert watched.calls == 0
        assert summary.attempted == 0
        assert summary.skipped == 140
        assert summary.retried_failures == 0
        assert list(store.open_failures()) == [key_id]

    async def test_other_ledgered_failures_are_retried_on_resume(self, tmp_path, matrix):
        profile = ORACLE.model_copy(update={"retry_limit": 1})
        (oracle,) = _endpoints(matrix, profile)
        key_id = _key_id("oracle", Variant.BASE, matrix[Variant.BASE][0].sample_id)
        flaky = Scripted(oracle, {key_id: [TransientEndpointError("HTTP 503")] * 2})
        await run_matrix([flaky], matrix, TraceStore(tmp_path), sleep=no_sleep)

        store = TraceStore(tmp_path)
        summary = await run_matrix(_endpoints(matrix, ORACLE), matrix, store, sleep=no_sleep)
        assert summary.retried_failures == 1
        assert summary.succeeded == 1
        assert summary.skipped == 139
        assert store.open_failures() == {}

    async def test_transient_errors_back_off(self, tmp_path, matrix):
        sample_id = matrix[Variant.BASE][0].sample_id
        key_id = _key_id("oracle", Variant.BASE, sample_id)
        (oracle,) = _endpoints(matrix, ORACLE)
        flaky = Scripted(
            oracle,
            {key_id: [TransientEndpointError("HTTP 429"), TransientEndpointError("HTTP 503")]},
        )
        delays: List[float] = []

        async def record_sleep(delay: float) -> None:
            delays.append(delay)

        store = TraceStore(tmp_path)
        summary = await run_matrix([flaky], matrix, store, sleep=record_sleep, limit=1)
        assert summary.succeeded == 7
        assert delays == [30.0, 60.0]

    async def test_exhausted_transient_errors_are_ledgered(self, tmp_path, matrix):
        profile = ORACLE.model_copy(update={"retry_limit": 1})
        (oracle,) = _endpoints(matrix, profile)
        key_id = _key_id("oracle", Variant.BASE, matrix[Variant.BASE][0].sample_id)
        flaky = Scripted(oracle, {key_id: [TransientEndpointError("HTTP 503")] * 2})
        store = TraceStore(tmp_path)
        summary = await run_matrix([flaky], matrix, store, sleep=no_sleep, limit=1)
        assert summary.failures_by_cause == {"TRANSIENT_ENDPOINT": 1}

    async def test_invalid_output_is_re_requested(self, tmp_path, matrix):
        sample_id = matrix[Variant.DOC_BUG][1].sample_id
        key_id = _key_id("oracle", Variant.DOC_BUG, sample_id)
        (oracle,) = _endpoints(matrix, ORACLE)
        sloppy = Scripted(oracle, {key_id: ["I am not sure.", '{"assessment": {}}']})

        store = TraceStore(tmp_path)
        await run_matrix([sloppy], matrix, store, sleep=no_sleep, limit=2)
        stored = store.get(RunKey("oracle", Variant.DOC_BUG, sample_id))
        assert stored is not None
        assert stored.attempts == 3

    async def test_persistently_invalid_output_is_ledgered(self, tmp_path, matrix):
        profile = ORACLE.model_copy(update={"retry_limit": 1})
        (oracle,) = _endpoints(matrix, profile)
        sample_id = matrix[Variant.BASE][0].sample_id
        key_id = _key_id("oracle", Variant.BASE, sample_id)
        sloppy = Scripted(oracle, {key_id: ["nope", "still nope"]})

        store = TraceStore(tmp_path)
        summary = await run_matrix([sloppy], matrix, store, sleep=no_sleep, limit=1)
        assert summary.failures_by_cause == {"INVALID_OUTPUT": 1}
        ledgered = store.open_failures()[key_id]
        assert ledgered.attempts == 2
        assert ledgered.raw == "still nope"

    @pytest.mark.parametrize("kind", ["truncated", "tag-prefixed", "bad-escape"])
    async def test_malformed_outputs_are_repaired(self, tmp_path, matrix, kind):
        profile = EndpointProfile(model_id="sloppy", locator=f"auditor://malformed?kind={kind}")
        store = TraceStore(tmp_path)
        summary = await run_matrix(
            _endpoints(matrix, profile), matrix, store, sleep=no_sleep, limit=2
        )
        assert summary.succeeded == 14
        assert all(t.repaired and t.attempts == 1 for t in store.iter_traces())

    async def test_leaking_record_is_ledgered(self, tmp_path, bundle):
        javadoc = bundle.javadoc.replace("ascending", "descending")
        leaking = PerturbationRecord.from_bundle(
            bundle,
            variant=Variant.DOC_BUG,
            severity=Severity.HEAVY,
            fault_category=FaultCategory.WRONG_BEHAVIOR,
            affected_artifacts=[Artifact.JAVADOC],
            ground_truth_summary="Order reversed.",
            change_description="Javadoc",
            javadoc=javadoc,
        )
        datasets = {Variant.DOC_BUG: [leaking]}
        assert scan_for_leaks(datasets) == [
            {"sample_id": bundle.sample_id, "variant": "DOC_BUG", "token": "Javadoc"}
        ]
        store = TraceStore(tmp_path)
        summary = await run_matrix(
            _endpoints(datasets, ORACLE), datasets, store, sleep=no_sleep
        )
        assert summary.failures_by_cause == {"LEAK_ABORT": 1}
        assert len(store) == 0


class TestManifest:
    def test_written_then_verified(self, tmp_path, matrix):
        endpoints = _endpoints(matrix, ORACLE)
        first = check_manifest(tmp_path, endpoints, {"seed": 11})
        assert first["models"] == {"oracle": "auditor://oracle"}
        assert check_manifest(tmp_path, endpoints, {"seed": 11}) == first

    def test_roster_may_grow(self, tmp_path, matrix):
        check_manifest(tmp_path, _endpoints(matrix, ORACLE), {"seed": 11})
        manifest = check_manifest(tmp_path, _endpoints(matrix, RANDOM), {"seed": 11})
        assert set(manifest["models"]) == {"oracle", "random"}

    def test_moved_model_is_refused(self, tmp_path, matrix):
        check_manifest(tmp_path, _endpoints(matrix, ORACLE), {"seed": 11})
        moved = ORACLE.model_copy(update={"locator": "auditor://silent"})
        with pytest.raises(PromptDriftError):
            check_manifest(tmp_path, _endpoints(matrix, moved), {"seed": 11})

    def test_settings_change_is_refused(self, tmp_path, matrix):
        check_manifest(tmp_path, _endpoints(matrix, ORACLE), {"seed": 11})
        with pytest.raises(PromptDriftError):
            check_manifest(tmp_path, _endpoints(matrix, ORACLE), {"seed": 12})

    def test_prompt_change_is_refused(self, tmp_path, matrix, monkeypatch):
        check_manifest(tmp_path, _endpoints(matrix, ORACLE))
        monkeypatch.setattr(
            runner_module, "prompt_hashes", lambda: {"system_prompt": "0", "user_template": "0"}
        )
        with pytest.raises(PromptDriftError) as exc:
            check_manifest(tmp_path, _endpoints(matrix, ORACLE))
        assert exc.value.code == "PROMPT_DRIFT"
