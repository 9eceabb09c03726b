"""Concurrent mutation requests with validation and bounded re-requests."""

import asyncio
import json
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field

from ..archive import write_records
from ..corpus.models import ArtifactBundle
from ..errors import EndpointError, MissingMetadata, MutationRejected, ParseFailure
from ..harness.endpoints import ChatEndpoint, ChatRequest, Sleep, complete_with_retry
from ..trace.repair import repair_raw_output
from ..types import MUTATION_VARIANTS, Severity, Strategy, Variant
from .models import MutationCondition, PerturbationRecord
from .mutation import (
    MUTATION_SYSTEM_PROMPT,
    build_mutation_request,
    mutation_request_id,
    validate_mutation,
)

logger = logging.getLogger(__name__)

REVIEW_QUEUE_FILE = "review_queue.jsonl"
FAILURES_FILE = "mutation_failures.jsonl"


class MutationFailure(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_id: str
    variant: Variant
    severity: Severity
    strategy: Optional[Strategy] = None
    cause: str
    message: str
    attempts: int = Field(ge=0)


class MutationOutcome(BaseModel):
    records: List[PerturbationRecord] = Field(default_factory=list)
    failures: List[MutationFailure] = Field(default_factory=list)

    def save(self, directory: Path) -> Dict[str, int]:
        """Write the review queue and the failure ledger under ``directory``."""
        directory = Path(directory)
        queued = write_records(directory / REVIEW_QUEUE_FILE, self.records)
        failed = write_records(directory / FAILURES_FILE, self.failures)
        if queued:
            logger.info(f"{queued} mutated records await manual review in {REVIEW_QUEUE_FILE}")
        return {"review_queue": queued, "failures": failed}


class MutationEngine:
    """Drives one mutation endpoint over the per-sample condition assignment."""

    def __init__(
        self, endpoint: ChatEndpoint, max_attempts: int = 3, sleep: Sleep = asyncio.sleep
    ):
        self.endpoint = endpoint
        self.max_attempts = max_attempts
        self.sleep = sleep
        self._gate = asyncio.Semaphore(endpoint.profile.concurrency)

    async def mutate(
        self, bundle: ArtifactBundle, condition: MutationCondition
    ) -> PerturbationRecord:
        """One validated mutation; the last rejection is raised once attempts run out."""
        request = ChatRequest(
            model_id=self.endpoint.model_id,
            system=MUTATION_SYSTEM_PROMPT,
            user=build_mutation_request(
                bundle, condition.variant, condition.severity, condition.strategy
            ),
            temperature=self.endpoint.profile.temperature,
            max_tokens=self.endpoint.profile.max_tokens,
            request_id=mutation_request_id(bundle.sample_id, condition),
        )
        last: Optional[Exception] = None
        for attempt in range(1, self.max_attempts + 1):
            async with self._gate:
                raw = await complete_with_retry(self.endpoint, request, self.sleep)
            try:
                reply = json.loads(repair_raw_output(raw))
                if not isinstance(reply, dict):
                    raise MissingMetadata("reply is not an object", bundle.sample_id, {})
                return validate_mutation(bundle, reply, condition)
            except (ParseFailure, MutationRejected) as e:
                last = e
                logger.warning(
                    f"{request.request_id}: rejected ({e.code}) attempt "
                    f"{attempt}/{self.max_attempts}: {e.message}"
                )
        assert last is not None
        raise last

    async def _attempt(
        self, bundle: ArtifactBundle, condition: MutationCondition, outcome: MutationOutcome
    ) -> None:
        try:
            outcome.records.append(await self.mutate(bundle, condition))
        except (ParseFailure, MutationRejected, EndpointError) as e:
            attempts = 0 if isinstance(e, EndpointError) else self.max_attempts
            outcome.failures.append(
                MutationFailure(
                    sample_id=bundle.sample_id,
                    variant=condition.variant,
                    severity=condition.severity,
                    strategy=condition.strategy,
                    cause=e.code,
                    message=e.message,
                    attempts=attempts,
                )
            )
            logger.error(f"{bundle.sample_id}/{condition.variant.value}: {e.code}: {e.message}")

    async def run(
        self,
        bundles: Sequence[ArtifactBundle],
        assignments: Mapping[str, Mapping[Variant, MutationCondition]],
    ) -> MutationOutcome:
        """Mutate every bundle once per family; output order follows ``bundles``."""
        outcome = MutationOutcome()
        jobs = [
            (bundle, assignments[bundle.sample_id][family])
            for bundle in bundles
            for family in MUTATION_VARIANTS
        ]
        logger.info(f"Requesting {len(jobs)} mutations from {self.endpoint.model_id}")
        await asyncio.gather(*(self._attempt(b, c, outcome) for b, c in jobs))

        order = {(b.sample_id, c.variant): i for i, (b, c) in enumerate(jobs)}
        outcome.records.sort(key=lambda r: order[(r.sample_id, r.variant)])
        outcome.failures.sort(key=lambda f: order[(f.sample_id, f.variant)])
        logger.info(
            f"Mutation done: {len(outcome.records)} accepted, {len(outcome.failures)} failed"
        )
        return outcome
