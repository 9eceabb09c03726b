"""End-to-end stage runs over the offline reference auditors."""

import json

import pytest

from artifact_trust_bench.config import EmbedderSettings
from artifact_trust_bench.errors import ConfigError, PrerequisiteError
from artifact_trust_bench.harness import TraceStore
from artifact_trust_bench.metrics import read_metrics
from artifact_trust_bench.pipeline import RunLayout, run_stage
from artifact_trust_bench.types import Signal, Strategy, Variant

from .conftest import offline_config


def _through(stage, config, **kwargs):
    order = ["curate", "perturb", "elicit", "evaluate", "report"]
    summaries = {}
    for name in order[: order.index(stage) + 1]:
        summaries[name] = run_stage(name, config, **kwargs)
    return summaries


def _value(rows, statistic, **group):
    matches = [
        r for r in rows
        if r.statistic == statistic and all(getattr(r, k) == v for k, v in group.items())
    ]
    assert len(matches) == 1, (statistic, group)
    return matches[0].value


class TestFullRun:
    def test_every_stage(self, run_config):
        summaries = _through("report", run_config)
        layout = RunLayout(run_config.output_root)

        assert summaries["curate"].counts["accepted"] == 20
        assert summaries["perturb"].counts["samples"] == 20
        assert summaries["perturb"].counts["inputs"] == 140
        assert summaries["perturb"].ledgers["mutation_failures"] == 0
        assert summaries["elicit"].counts["stored_traces"] == 280
        assert summaries["elicit"].ledgers["open_failures"] == 0
        assert summaries["evaluate"].counts["records"] == 280
        assert summaries["evaluate"].details["checked_against_archives"]
        assert (layout.reports / "summary.txt").read_text().startswith("IR detection rate")

        for stage in summaries:
            recorded = json.loads(layout.summary(stage).read_text())
            assert recorded["stage"] == stage
        assert (layout.summaries / "config.yaml").exists()

        rows = [r for r in read_metrics(layout.metrics) if r.model_id == "oracle"]
        for signal in Signal:
            assert _value(rows, "false_positive_floor", signal=signal) == 0.0
        assert _value(
            rows, "detection_rate", variant=Variant.DOC_BUG, signal=Signal.IR,
            severity=None, strategy=None,
        ) == 1.0
        for strategy, rate in ((Strategy.DOCSTRING_ONLY, 1.0), (Strategy.BOTH, 1.0),
                               (Strategy.MUT_ONLY, 0.0)):
            assert _value(
                rows, "detection_rate", variant=Variant.CONTRADICTION, signal=Signal.IR,
                strategy=strategy,
            ) == rate
        similarity = _value(
            rows, "description_similarity", variant=Variant.DOC_BUG, signal=Signal.PCA,
            severity=None,
        )
        assert similarity == pytest.approx(1.0)

    def test_rerun_rewrites_identical_archives(self, run_config):
        layout = RunLayout(run_config.output_root)

        def snapshot():
            return {
                path.relative_to(layout.root): path.read_bytes()
                for directory in (layout.curate, layout.perturb)
                for path in sorted(directory.rglob("*"))
                if path.is_file()
            }

        _through("perturb", run_config)
        first = snapshot()
        assert layout.accepted.relative_to(layout.root) in first
        assert any(p.parts[:2] == ("perturb", "matrix") for p in first)

        _through("perturb", run_config)
        assert snapshot() == first

    def test_scan_is_clean(self, run_config):
        _through("perturb", run_config)
        summary = run_stage("scan", run_config)
        assert summary.counts == {"prompts": 140, "findings": 0}


class TestElicitation:
    def test_limit(self, run_config):
        _through("perturb", run_config)
        limited, overrides = run_config.with_overrides(limit=5)
        summary = run_stage("elicit", limited, overrides)
        assert summary.counts["attempted"] == 2 * 7 * 5
        assert summary.overrides == {"limit": 5}

    def test_existing_store_needs_resume(self, run_config):
        _through("elicit", run_config)
        with pytest.raises(ConfigError):
            run_stage("elicit", run_config)

        summary = run_stage("elicit", run_config, resume=True)
        assert summary.counts["attempted"] == 0
        assert summary.counts["skipped"] == 280
        assert summary.overrides == {"resume": True}

    def test_resume_extends_a_limited_run(self, run_config):
        _through("perturb", run_config)
        limited, _ = run_config.with_overrides(limit=5)
        run_stage("elicit", limited)
        summary = run_stage("elicit", run_config, resume=True)
        assert summary.counts["skipped"] == 70
        assert summary.counts["succeeded"] == 210
        assert len(TraceStore(RunLayout(run_config.output_root).store)) == 280

    def test_single_model_and_variant(self, run_config):
        _through("perturb", run_config)
        narrowed, overrides = run_config.with_overrides(models=["random"], variants=["mut_bug"])
        summary = run_stage("elicit", narrowed, overrides)
        assert summary.counts["stored_traces"] == 20
        assert summary.details["models"] == ["random"]
        assert overrides == {"models": ["random"], "variants": ["MUT_BUG"]}


class TestPrerequisites:
    @pytest.mark.parametrize("stage", ["perturb", "elicit", "evaluate", "report", "scan"])
    def test_missing_inputs(self, run_config, stage):
        with pytest.raises(PrerequisiteError) as exc:
            run_stage(stage, run_config)
        assert exc.value.code == "PREREQUISITE_MISSING"
        assert exc.value.missing

    def test_report_before_evaluate(self, run_config):
        _through("elicit", run_config)
        with pytest.raises(PrerequisiteError):
            run_stage("report", run_config)

    def test_curate_needs_a_corpus(self, tmp_path):
        with pytest.raises(ConfigError):
            run_stage("curate", offline_config(tmp_path))

    def test_unknown_stage(self, run_config):
        with pytest.raises(ConfigError):
            run_stage("publish", run_config)


def test_evaluate_without_an_embedder(tmp_path, corpus_file):
    config = offline_config(
        tmp_path, corpus_file, embedder=EmbedderSettings(backend="http", url=None)
    )
    summary = _through("evaluate", config)["evaluate"]
    assert summary.details["embedder"] is None
    assert summary.details["embedder_error"] == "http embedder needs embedder.url"
    rows = read_metrics(RunLayout(config.output_root).metrics)
    notes = {r.note for r in rows if r.statistic == "description_similarity"}
    assert notes == {"unavailable: http embedder needs embedder.url"}
