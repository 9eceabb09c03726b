"""Blind elicitation of the (model x variant x sample) matrix."""

import asyncio
import hashlib
import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from ..archive import read_json, write_json
from ..errors import (
    LeakAbort,
    ParseFailure,
    PermanentRefusal,
    PromptDriftError,
    TraceValidationError,
    TransientEndpointError,
)
from ..perturb.models import PerturbationRecord
from ..trace.repair import repair_raw_output
from ..trace.validate import DEFAULT_BANDS, LabelBands, serialize_trace, validate_trace
from ..types import Variant
from .endpoints import ChatEndpoint, ChatRequest, Sleep, complete_with_retry
from .prompts import prompt_hashes, render_blind_prompt
from .store import FailureRecord, RunKey, StoredTrace, TraceStore

logger = logging.getLogger(__name__)

MANIFEST_FILE = "run_manifest.json"
INVALID_OUTPUT = "INVALID_OUTPUT"


class RunSummary(BaseModel):
    attempted: int = 0
    succeeded: int = 0
    failed: int = 0
    skipped: int = 0
    retried_failures: int = 0
    failures_by_cause: Dict[str, int] = Field(default_factory=dict)
    duration_s: float = 0.0


def check_manifest(
    directory: Path,
    endpoints: Sequence[ChatEndpoint],
    settings: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """Write or verify ``run_manifest.json`` for the store in ``directory``.

    Prompt hashes and the settings fingerprint must match exactly. The roster
    may grow between runs, but a model id already on it must keep its locator.
    """
    path = Path(directory) / MANIFEST_FILE
    hashes = prompt_hashes()
    fingerprint = hashlib.sha256(
        json.dumps(dict(settings or {}), sort_keys=True, default=str).encode()
    ).hexdigest()
    roster = {e.model_id: e.profile.locator for e in endpoints}
    if path.exists():
        manifest = read_json(path)
        if manifest.get("prompts") != hashes:
            raise PromptDriftError(
                "prompt texts changed since this run started; refusing to resume",
                {"recorded": manifest.get("prompts"), "current": hashes},
            )
        if manifest.get("settings", fingerprint) != fingerprint:
            raise PromptDriftError(
                "run settings changed since this run started; refusing to resume",
                {"recorded": manifest.get("settings"), "current": fingerprint},
            )
        recorded: Dict[str, str] = dict(manifest.get("models", {}))
        moved = [m for m, loc in roster.items() if m in recorded and recorded[m] != loc]
        if moved:
            raise PromptDriftError(
                f"model(s) {', '.join(moved)} point at a different endpoint than recorded",
                {"models": moved},
            )
        recorded.update(roster)
        roster = recorded
    manifest = {
        "prompts": hashes,
        "settings": fingerprint,
        "models": dict(sorted(roster.items())),
    }
    write_json(path, manifest)
    return manifest


def _bundle_fields(record: PerturbationRecord) -> Dict[str, Optional[str]]:
    return {
        "javadoc": record.javadoc,
        "signature": record.signature,
        "mut_body": record.mut_body,
        "test_prefix": record.test_prefix,
        "reference_assertion": record.reference_assertion,
    }


class _MatrixRun:
    def __init__(self, store: TraceStore, bands: LabelBands, sleep: Sleep):
        self.store = store
        self.bands = bands
        self.sleep = sleep
        self.summary = RunSummary()

    def _fail(
        self, key: RunKey, cause: str, message: str, attempts: int, raw: Optional[str]
    ) -> None:
        self.store.record_failure(
            FailureRecord(
                model_id=key.model_id,
                variant=key.variant,
                sample_id=key.sample_id,
                cause=cause,
                message=message,
                attempts=attempts,
                raw=raw,
            )
        )
        self.summary.failed += 1
        self.summary.failures_by_cause[cause] = self.summary.failures_by_cause.get(cause, 0) + 1
        logger.error(f"{key.as_id()}: ledgered as {cause}: {message}")

    async def run_cell(
        self, endpoint: ChatEndpoint, record: PerturbationRecord, gate: asyncio.Semaphore
    ) -> None:
        key = RunKey(endpoint.model_id, record.variant, record.sample_id)
        try:
            system, user = render_blind_prompt(record)
        except LeakAbort as e:
            self._fail(key, e.code, e.message, 0, None)
            return

        profile = endpoint.profile
        request = ChatRequest(
            model_id=endpoint.model_id,
            system=system,
            user=user,
            temperature=profile.temperature,
            max_tokens=profile.max_tokens,
            request_id=key.as_id(),
        )
        raw: Optional[str] = None
        last_error = ""
        attempts = 0
        for attempts in range(1, profile.retry_limit + 2):
            try:
                async with gate:
                    raw = await complete_with_retry(endpoint, request, self.sleep)
            except (PermanentRefusal, TransientEndpointError) as e:
                self._fail(key, e.code, e.message, attempts, None)
                return

            try:
                candidate = repair_raw_output(raw)
                trace = validate_trace(
                    candidate, record.sample_id, record.variant, endpoint.model_id, self.bands
                )
            except (ParseFailure, TraceValidationError) as e:
                last_error = e.message
                logger.warning(f"{key.as_id()}: invalid output (attempt {attempts}): {e.message}")
                continue

            self.store.append(
                StoredTrace(
                    model_id=endpoint.model_id,
                    variant=record.variant,
                    sample_id=record.sample_id,
                    bundle=_bundle_fields(record),
                    provenance=record.provenance,
                    trace=serialize_trace(trace),
                    overall_confidence=trace.overall_confidence,
                    warnings=trace.warnings,
                    repaired=candidate != raw.strip(),
                    attempts=attempts,
                )
            )
            self.summary.succeeded += 1
            return

        self._fail(key, INVALID_OUTPUT, last_error, attempts, raw)


async def run_matrix(
    endpoints: Sequence[ChatEndpoint],
    datasets: Mapping[Variant, Sequence[PerturbationRecord]],
    store: TraceStore,
    bands: LabelBands = DEFAULT_BANDS,
    sleep: Sleep = asyncio.sleep,
    limit: Optional[int] = None,
) -> RunSummary:
    """Elicit one trace per missing RunKey and append it to ``store``.

    Cells already in the store are skipped, and so are cells whose latest ledgered
    failure is a permanent refusal; other ledgered failures are attempted again.
    In-flight calls per endpoint never exceed the profile's concurrency. An
    unexpected error cancels the remaining cells and propagates;
    everything appended so far stays valid for a resume.
    """
    started = time.monotonic()
    open_failures = store.open_failures()
    run = _MatrixRun(store, bands, sleep)

    pending: List[Tuple[ChatEndpoint, PerturbationRecord, asyncio.Semaphore]] = []
    for endpoint in endpoints:
        gate = asyncio.Semaphore(endpoint.profile.concurrency)
        for variant, records in datasets.items():
            chosen = list(records)[:limit] if limit is not None else list(records)
            for record in chosen:
                key = RunKey(endpoint.model_id, variant, record.sample_id)
                if key in store:
                    run.summary.skipped += 1
                    continue
                failure = open_failures.get(key.as_id())
                if failure is not None and failure.cause == PermanentRefusal.code:
                    run.summary.skipped += 1
                    continue
                if failure is not None:
                    run.summary.retried_failures += 1
                pending.append((endpoint, record, gate))

    run.summary.attempted = len(pending)
    logger.info(
        f"Elicitation: {len(pending)} cells to run, {run.summary.skipped} already stored "
        f"({run.summary.retried_failures} retrying ledgered failures)"
    )

    tasks = [asyncio.create_task(run.run_cell(e, r, g)) for e, r, g in pending]
    try:
        await asyncio.gather(*tasks)
    except BaseException:
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        logger.error(f"Elicitation halted after {run.summary.succeeded} stored traces")
        raise

    run.summary.duration_s = round(time.monotonic() - started, 3)
    logger.info(
        f"Elicitation done: {run.summary.succeeded} stored, {run.summary.failed} failed "
        f"in {run.summary.duration_s:.1f}s"
    )
    return run.summary
