"""Command-line entry point: one subcommand per pipeline stage plus ``serve``."""

import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional, Tuple

import click

from .config import RunConfig
from .errors import TraceBenchError
from .pipeline import StageSummary, run_stage

logger = logging.getLogger(__name__)


def _configure_logging(verbose: int) -> None:
    if verbose == 0:
        logging.basicConfig(level=logging.WARNING, format="%(message)s", stream=sys.stderr)
    elif verbose == 1:
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    else:
        logging.basicConfig(
            level=logging.DEBUG, format="%(name)s: %(message)s", stream=sys.stderr
        )


def _split(values: Tuple[str, ...]) -> Optional[List[str]]:
    items = [v.strip() for value in values for v in value.split(",") if v.strip()]
    return items or None


def _fail(error: TraceBenchError) -> NoReturn:
    click.echo(json.dumps(error.to_dict(), indent=2, sort_keys=True, default=str))
    sys.exit(1)


def _stage_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(path_type=Path),
            default=Path("bench.yaml"),
            show_default=True,
            help="Run configuration (YAML)",
        ),
        click.option("--resume", is_flag=True, help="Continue an existing trace store"),
        click.option("--models", multiple=True, help="Model ids to run (comma separated)"),
        click.option("--variants", multiple=True, help="Variants to run (comma separated)"),
        click.option("--limit", type=click.IntRange(min=1), help="Samples per variant"),
        click.option("--seed", type=int, help="Override the configured seed"),
        click.option("--out", type=click.Path(path_type=Path), help="Override output root"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run(stage: str, params: Dict[str, Any]) -> None:
    try:
        config = RunConfig.load(params["config_path"])
        config, overrides = config.with_overrides(
            models=_split(params["models"]),
            variants=_split(params["variants"]),
            limit=params["limit"],
            seed=params["seed"],
            out=params["out"],
        )
        summary: StageSummary = run_stage(stage, config, overrides, resume=params["resume"])
    except TraceBenchError as e:
        logger.error(f"Stage {stage} failed: {e.message}")
        _fail(e)
    click.echo(summary.model_dump_json(indent=2))
    if stage == "report" and "summary" in summary.details:
        click.echo(summary.details["summary"], err=True)


@click.group()
@click.option("--verbose", "-v", count=True, help="Increase verbosity (use -v or -vv)")
@click.version_option(package_name="artifact-trust-bench")
def main(verbose: int) -> None:
    """Artifact trust benchmark: perturb, elicit and score reasoning traces."""
    _configure_logging(verbose)


@main.command()
@_stage_options
def curate(**params: Any) -> None:
    """Extract candidates from the corpus and keep the clean base dataset."""
    _run("curate", params)


@main.command()
@_stage_options
def perturb(**params: Any) -> None:
    """Build removal and mutation variants and assemble the variant matrix."""
    _run("perturb", params)


@main.command()
@_stage_options
def elicit(**params: Any) -> None:
    """Query every configured model on every matrix cell (blind protocol)."""
    _run("elicit", params)


@main.command()
@_stage_options
def evaluate(**params: Any) -> None:
    """Compute metric rows from the stored traces."""
    _run("evaluate", params)


@main.command()
@_stage_options
def report(**params: Any) -> None:
    """Write plot-ready report tables from the metric rows."""
    _run("report", params)


@main.command()
@_stage_options
def scan(**params: Any) -> None:
    """Scan every rendered prompt of the matrix for provenance leaks."""
    _run("scan", params)


@main.command()
def serve() -> None:
    """Run the MCP tool server on stdio."""
    from .server import main as serve_main

    try:
        asyncio.run(serve_main())
    except KeyboardInterrupt:
        print("Server stopped by user", file=sys.stderr)
