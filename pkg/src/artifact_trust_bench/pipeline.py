"""Stage orchestration: curate, perturb, elicit, evaluate, report and scan.

Every stage reads the previous stage's archives under ``config.output_root``,
writes its own, and records a summary JSON next to them.
"""

import asyncio
import logging
import time
from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from .archive import read_models, write_json, write_records
from .auditor import provenance_index
from .config import RunConfig
from .corpus import ArtifactBundle, curate, load_candidates
from .errors import ConfigError, EmbedderUnavailable, LeakAbort, PrerequisiteError
from .harness import TraceStore, check_manifest, open_endpoint, run_matrix, scan_for_leaks
from .harness.store import TRACES_FILE
from .metrics import (
    build_records,
    evaluate_records,
    open_embedder,
    read_metrics,
    summary_table,
    write_metrics,
    write_tables,
)
from .metrics.report import METRICS_FILE
from .perturb import MutationEngine, assemble_variant_matrix, assign_conditions, write_matrix
from .perturb.matrix import load_matrix, severity_histogram, variant_path
from .types import Variant

logger = logging.getLogger(__name__)

STAGES = ("curate", "perturb", "elicit", "evaluate", "report", "scan")


class RunLayout:
    """Where each stage keeps its outputs under one output root."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.curate = self.root / "curate"
        self.candidates = self.curate / "candidates.jsonl"
        self.accepted = self.curate / "accepted.jsonl"
        self.verdicts = self.curate / "verdicts.jsonl"
        self.perturb = self.root / "perturb"
        self.matrix = self.perturb / "matrix"
        self.store = self.root / "store"
        self.metrics = self.root / "metrics"
        self.reports = self.root / "reports"
        self.scan = self.root / "scan"
        self.summaries = self.root / "summaries"

    def summary(self, stage: str) -> Path:
        return self.summaries / f"{stage}.json"


class StageSummary(BaseModel):
    stage: str
    counts: Dict[str, int] = Field(default_factory=dict)
    ledgers: Dict[str, int] = Field(default_factory=dict)
    overrides: Dict[str, Any] = Field(default_factory=dict)
    details: Dict[str, Any] = Field(default_factory=dict)
    duration_s: float = 0.0


def _require(stage: str, paths: Sequence[Path]) -> None:
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise PrerequisiteError(stage, missing)


def _finish(
    layout: RunLayout, config: RunConfig, summary: StageSummary, started: float
) -> StageSummary:
    summary.duration_s = round(time.monotonic() - started, 3)
    write_json(layout.summary(summary.stage), summary.model_dump(mode="json"))
    (layout.summaries / "config.yaml").write_text(config.to_yaml(), encoding="utf-8")
    logger.info(f"Stage {summary.stage} done in {summary.duration_s:.2f}s: {summary.counts}")
    return summary


def stage_curate(config: RunConfig, overrides: Optional[Dict[str, Any]] = None) -> StageSummary:
    """Extract candidates from ``config.corpus`` and keep the clean base dataset."""
    started = time.monotonic()
    layout = RunLayout(config.output_root)
    if config.corpus is None:
        raise ConfigError("curate needs a corpus path in the configuration")
    _require("curate", [config.corpus])
    logger.info(f"Curating candidates from {config.corpus}")

    candidates = load_candidates(config.corpus)
    accepted, verdicts = curate(candidates)
    write_records(layout.candidates, candidates)
    write_records(layout.accepted, accepted)
    write_records(layout.verdicts, verdicts)

    rejections = Counter(rule for v in verdicts for rule in v.failed_rules)
    flagged = sum(1 for v in verdicts if v.review_flags)
    summary = StageSummary(
        stage="curate",
        counts={
            "candidates": len(candidates),
            "accepted": len(accepted),
            "rejected": len(candidates) - len(accepted),
            "review_flagged": flagged,
        },
        overrides=overrides or {},
        details={"rejections_by_rule": dict(sorted(rejections.items()))},
    )
    return _finish(layout, config, summary, started)


async def stage_perturb(
    config: RunConfig, overrides: Optional[Dict[str, Any]] = None
) -> StageSummary:
    """Removal variants plus validated mutations, assembled into the variant matrix.

    Samples with any mutation family ledgered as failed are left out of the
    matrix so every retained sample has all seven variants.
    """
    started = time.monotonic()
    layout = RunLayout(config.output_root)
    _require("perturb", [layout.accepted])
    bundles = read_models(layout.accepted, ArtifactBundle)
    assignments = assign_conditions([b.sample_id for b in bundles], config.seed)

    endpoint = open_endpoint(config.mutation.endpoint, policy=config.auditor)
    try:
        engine = MutationEngine(endpoint, config.mutation.max_attempts)
        outcome = await engine.run(bundles, assignments)
    finally:
        await endpoint.aclose()
    ledgers = outcome.save(layout.perturb)

    failed_ids = {f.sample_id for f in outcome.failures}
    complete = [b for b in bundles if b.sample_id not in failed_ids]
    if failed_ids:
        logger.warning(f"Dropping {len(failed_ids)} samples with failed mutations from the matrix")
    records = [r for r in outcome.records if r.sample_id not in failed_ids]
    matrix = assemble_variant_matrix(complete, records)
    sizes = write_matrix(layout.matrix, matrix)

    histogram = severity_histogram(records)
    summary = StageSummary(
        stage="perturb",
        counts={
            "samples": len(complete),
            "dropped_samples": len(failed_ids),
            "mutations": len(records),
            "inputs": sum(sizes.values()),
            **{f"variant_{name}": n for name, n in sizes.items()},
        },
        ledgers={"mutation_failures": ledgers["failures"]},
        overrides=overrides or {},
        details={
            "review_queue": ledgers["review_queue"],
            "severity_histogram": {f"{v}/{s}": n for (v, s), n in sorted(histogram.items())},
            "mutation_endpoint": config.mutation.endpoint.model_id,
        },
    )
    return _finish(layout, config, summary, started)


def _matrix_paths(layout: RunLayout, variants: Sequence[Variant]) -> List[Path]:
    return [variant_path(layout.matrix, v) for v in variants]


def _run_settings(config: RunConfig) -> Dict[str, Any]:
    return {
        "seed": config.seed,
        "bands": config.bands.model_dump(mode="json"),
        "auditor": config.auditor.model_dump(mode="json"),
    }


async def stage_elicit(
    config: RunConfig,
    overrides: Optional[Dict[str, Any]] = None,
    resume: bool = False,
) -> StageSummary:
    """Run every (model, variant, sample) cell not yet in the trace store."""
    started = time.monotonic()
    layout = RunLayout(config.output_root)
    _require("elicit", _matrix_paths(layout, config.variants))
    if not config.models:
        raise ConfigError("elicit needs at least one model endpoint in the configuration")

    traces = layout.store / TRACES_FILE
    if traces.exists() and traces.stat().st_size > 0 and not resume:
        raise ConfigError(
            f"trace store {layout.store} already holds traces; pass --resume to continue it",
            {"store": str(layout.store)},
        )

    datasets = load_matrix(layout.matrix, config.variants)
    provenance = provenance_index(datasets)
    endpoints = [open_endpoint(p, provenance, config.auditor) for p in config.models]
    try:
        check_manifest(layout.store, endpoints, _run_settings(config))
        store = TraceStore(layout.store)
        result = await run_matrix(endpoints, datasets, store, config.bands, limit=config.limit)
    finally:
        await asyncio.gather(*(e.aclose() for e in endpoints))

    summary = StageSummary(
        stage="elicit",
        counts={
            "stored_traces": len(store),
            "attempted": result.attempted,
            "succeeded": result.succeeded,
            "failed": result.failed,
            "skipped": result.skipped,
            "retried_failures": result.retried_failures,
        },
        ledgers={
            "failures": sum(1 for _ in store.iter_failures()),
            "open_failures": len(store.open_failures()),
        },
        overrides={**(overrides or {}), **({"resume": True} if resume else {})},
        details={
            "failures_by_cause": result.failures_by_cause,
            "models": [e.model_id for e in endpoints],
        },
    )
    return _finish(layout, config, summary, started)


def stage_evaluate(
    config: RunConfig, overrides: Optional[Dict[str, Any]] = None
) -> StageSummary:
    """Join stored traces with provenance and compute every metric row."""
    started = time.monotonic()
    layout = RunLayout(config.output_root)
    _require("evaluate", [layout.store / TRACES_FILE])
    store = TraceStore(layout.store)

    archive_paths = _matrix_paths(layout, config.variants)
    archives = None
    if all(p.exists() for p in archive_paths):
        archives = load_matrix(layout.matrix, config.variants)
    wanted = set(config.variants)
    records = build_records((t for t in store.iter_traces() if t.variant in wanted), archives)

    embedder_error = ""
    try:
        embedder = open_embedder(config.embedder)
    except EmbedderUnavailable as e:
        logger.warning(f"Description similarity skipped: {e.message}")
        embedder, embedder_error = None, e.message
    rows = evaluate_records(
        records,
        embedder,
        config.primary_signal,
        config.embedder.combined,
        embedder_error or "no embedder configured",
    )
    write_metrics(layout.metrics, rows)

    summary = StageSummary(
        stage="evaluate",
        counts={
            "records": len(records),
            "metric_rows": len(rows),
            "undefined_rows": sum(1 for r in rows if r.value is None),
        },
        ledgers={"open_failures": len(store.open_failures())},
        overrides=overrides or {},
        details={
            "embedder": config.embedder.backend if embedder is not None else None,
            "embedder_error": embedder_error or None,
            "checked_against_archives": archives is not None,
        },
    )
    return _finish(layout, config, summary, started)


def stage_report(config: RunConfig, overrides: Optional[Dict[str, Any]] = None) -> StageSummary:
    """Plot-ready long-format tables and a human-readable detection summary."""
    started = time.monotonic()
    layout = RunLayout(config.output_root)
    _require("report", [layout.metrics / METRICS_FILE])
    rows = read_metrics(layout.metrics)
    written = write_tables(layout.reports, rows)
    text = summary_table(rows, config.primary_signal)
    (layout.reports / "summary.txt").write_text(text + "\n", encoding="utf-8")

    summary = StageSummary(
        stage="report",
        counts=dict(written),
        overrides=overrides or {},
        details={"summary": text},
    )
    return _finish(layout, config, summary, started)


def stage_scan(config: RunConfig, overrides: Optional[Dict[str, Any]] = None) -> StageSummary:
    """Blind-leak scan over the perturbation archives; findings raise LeakAbort."""
    started = time.monotonic()
    layout = RunLayout(config.output_root)
    _require("scan", _matrix_paths(layout, config.variants))
    datasets = load_matrix(layout.matrix, config.variants)
    findings = scan_for_leaks(datasets)
    write_records(layout.scan / "leaks.jsonl", findings)

    summary = StageSummary(
        stage="scan",
        counts={
            "prompts": sum(len(records) for records in datasets.values()),
            "findings": len(findings),
        },
        overrides=overrides or {},
    )
    _finish(layout, config, summary, started)
    if findings:
        raise LeakAbort(
            f"{len(findings)} provenance leaks in rendered prompts",
            {"findings": findings[:20]},
        )
    return summary


def run_stage(
    stage: str,
    config: RunConfig,
    overrides: Optional[Dict[str, Any]] = None,
    resume: bool = False,
) -> StageSummary:
    """Synchronous entry point used by the CLI."""
    logger.info(f"Starting stage {stage} (output root {config.output_root})")
    if stage == "curate":
        return stage_curate(config, overrides)
    elif stage == "perturb":
        return asyncio.run(stage_perturb(config, overrides))
    elif stage == "elicit":
        return asyncio.run(stage_elicit(config, overrides, resume))
    elif stage == "evaluate":
        return stage_evaluate(config, overrides)
    elif stage == "report":
        return stage_report(config, overrides)
    elif stage == "scan":
        return stage_scan(config, overrides)
    raise ConfigError(f"unknown stage: {stage}", {"stages": list(STAGES)})


__all__ = [
    "STAGES",
    "RunLayout",
    "StageSummary",
    "run_stage",
    "stage_curate",
    "stage_elicit",
    "stage_evaluate",
    "stage_perturb",
    "stage_report",
    "stage_scan",
]
