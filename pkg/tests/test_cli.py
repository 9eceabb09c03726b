"""Tests for the command-line entry point."""

import json

import pytest
from click.testing import CliRunner

from artifact_trust_bench.cli import main

from .conftest import offline_config


def _json(output: str):
    """The first JSON object printed, ignoring any log lines around it."""
    payload, _ = json.JSONDecoder().raw_decode(output, output.index("{"))
    return payload


@pytest.fixture
def bench_yaml(tmp_path, corpus_file):
    path = tmp_path / "bench.yaml"
    path.write_text(offline_config(tmp_path, corpus_file).to_yaml(), encoding="utf-8")
    return path


def test_stage_commands_are_listed():
    result = CliRunner().invoke(main, ["--help"])
    for command in ("curate", "perturb", "elicit", "evaluate", "report", "scan", "serve"):
        assert command in result.output


class TestStages:
    def test_curate_prints_its_summary(self, bench_yaml):
        result = CliRunner().invoke(main, ["curate", "--config", str(bench_yaml)])
        assert result.exit_code == 0, result.output
        summary = _json(result.output)
        assert summary["stage"] == "curate"
        assert summary["counts"]["accepted"] == 20

    def test_overrides_are_recorded(self, bench_yaml, tmp_path):
        out = tmp_path / "elsewhere"
        args = ["curate", "--config", str(bench_yaml), "--seed", "5", "--out", str(out)]
        result = CliRunner().invoke(main, args)
        assert result.exit_code == 0, result.output
        assert _json(result.output)["overrides"] == {"seed": 5, "out": str(out)}
        assert (out / "curate" / "accepted.jsonl").exists()

    def test_elicit_with_limit(self, bench_yaml):
        runner = CliRunner()
        for stage in ("curate", "perturb"):
            assert runner.invoke(main, [stage, "--config", str(bench_yaml)]).exit_code == 0
        result = runner.invoke(
            main,
            ["elicit", "--config", str(bench_yaml), "--limit", "2", "--models", "oracle",
             "--variants", "BASE,DOC_BUG"],
        )
        assert result.exit_code == 0, result.output
        summary = _json(result.output)
        assert summary["counts"]["attempted"] == 4
        assert summary["overrides"]["variants"] == ["BASE", "DOC_BUG"]


class TestFailures:
    def test_missing_prerequisite(self, bench_yaml):
        result = CliRunner().invoke(main, ["report", "--config", str(bench_yaml)])
        assert result.exit_code == 1
        failure = _json(result.output)
        assert failure["error"] == "PREREQUISITE_MISSING"
        assert failure["details"]["stage"] == "report"

    def test_missing_config(self, tmp_path):
        result = CliRunner().invoke(main, ["scan", "--config", str(tmp_path / "none.yaml")])
        assert result.exit_code == 1
        assert _json(result.output)["error"] == "CONFIG_INVALID"

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bench.yaml"
        path.write_text("seed: [1, 2]\n", encoding="utf-8")
        result = CliRunner().invoke(main, ["curate", "--config", str(path)])
        assert result.exit_code == 1
        failure = _json(result.output)
        assert failure["error"] == "CONFIG_INVALID"
        assert failure["message"].startswith("invalid configuration at seed")

    def test_unknown_model(self, bench_yaml):
        args = ["elicit", "--config", str(bench_yaml), "--models", "gpt-7"]
        result = CliRunner().invoke(main, args)
        assert result.exit_code == 1
        assert _json(result.output)["details"] == {"unknown": ["gpt-7"]}
