"""MCP tool server for the benchmark's pure operations.

Standard MCP server exposing curation checks, Javadoc removals, blind prompt
rendering, trace validation and report summaries to agents over stdio.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent, Tool

from .corpus import ArtifactBundle, evaluate_candidate
from .errors import TraceBenchError
from .harness import render_blind_prompt
from .metrics import read_metrics, summary_table
from .metrics.report import METRICS_FILE
from .perturb import strip_description, strip_description_and_return, strip_return_tag
from .trace import derive_signals, repair_raw_output, validate_trace
from .types import Signal, Variant

logger = logging.getLogger(__name__)

_BUNDLE_PROPERTIES: Dict[str, Any] = {
    "mut_body": {"type": "string", "description": "Method under test, declaration and body"},
    "signature": {"type": "string", "description": "Method signature"},
    "javadoc": {"type": "string", "description": "Documentation block including delimiters"},
    "test_prefix": {"type": "string", "description": "Test code before the first assertion"},
}

_STRIPPERS = {
    "description": strip_description,
    "return": strip_return_tag,
    "both": strip_description_and_return,
}

TOOLS: List[Tool] = [
    Tool(
        name="check_bundle",
        description="Run the curation rules on one artifact bundle",
        inputSchema={
            "type": "object",
            "properties": {
                "sample_id": {"type": "string", "description": "Optional sample id"},
                **_BUNDLE_PROPERTIES,
            },
            "required": ["mut_body", "signature", "javadoc", "test_prefix"],
            "additionalProperties": False,
        },
    ),
    Tool(
        name="strip_javadoc",
        description="Remove the prose description and/or the @return clause of a Javadoc",
        inputSchema={
            "type": "object",
            "properties": {
                "javadoc": {"type": "string", "description": "Documentation block"},
                "mode": {
                    "type": "string",
                    "enum": list(_STRIPPERS),
                    "description": "What to remove (default: description)",
                },
            },
            "required": ["javadoc"],
            "additionalProperties": False,
        },
    ),
    Tool(
        name="render_prompt",
        description="Render the blind elicitation prompt for an artifact bundle",
        inputSchema={
            "type": "object",
            "properties": dict(_BUNDLE_PROPERTIES),
            "required": ["mut_body", "signature", "javadoc", "test_prefix"],
            "additionalProperties": False,
        },
    ),
    Tool(
        name="validate_trace",
        description="Repair, validate and derive conflict signals for a raw model output",
        inputSchema={
            "type": "object",
            "properties": {
                "raw": {"type": "string", "description": "Raw completion text"},
                "sample_id": {"type": "string", "description": "Sample id (default: adhoc)"},
                "variant": {
                    "type": "string",
                    "enum": [v.value for v in Variant],
                    "description": "Variant (default: BASE)",
                },
                "model_id": {"type": "string", "description": "Model id (default: adhoc)"},
            },
            "required": ["raw"],
            "additionalProperties": False,
        },
    ),
    Tool(
        name="summarize_report",
        description="Detection-rate summary of an evaluated run",
        inputSchema={
            "type": "object",
            "properties": {
                "metrics_dir": {
                    "type": "string",
                    "description": f"Directory holding {METRICS_FILE}",
                },
                "signal": {
                    "type": "string",
                    "enum": [s.value for s in Signal],
                    "description": "Signal to summarize (default: IR)",
                },
            },
            "required": ["metrics_dir"],
            "additionalProperties": False,
        },
    ),
]


def _text(message: str) -> List[TextContent]:
    return [TextContent(type="text", text=message)]


def _bundle(arguments: Dict[str, Any]) -> ArtifactBundle:
    return ArtifactBundle(
        sample_id=arguments.get("sample_id") or "adhoc",
        mut_body=arguments["mut_body"],
        signature=arguments["signature"],
        javadoc=arguments["javadoc"],
        test_prefix=arguments["test_prefix"],
    )


async def handle_call_tool(name: str, arguments: Dict[str, Any]) -> List[TextContent]:
    """Dispatch one tool call; failures come back as ``❌`` text, never as exceptions."""
    try:
        if name == "check_bundle":
            verdict = evaluate_candidate(_bundle(arguments))
            if verdict.accepted:
                text = f"✅ Bundle accepted ({verdict.executable_line_count} executable lines)"
            else:
                text = f"❌ Bundle rejected: {', '.join(verdict.failed_rules)}"
            if verdict.review_flags:
                text += f"\n⚠️ Review flags: {', '.join(verdict.review_flags)}"
            return _text(text)

        elif name == "strip_javadoc":
            mode = arguments.get("mode", "description")
            if mode not in _STRIPPERS:
                return _text(f"❌ Unknown mode: {mode}")
            return _text(_STRIPPERS[mode](arguments["javadoc"]))

        elif name == "render_prompt":
            system, user = render_blind_prompt(_bundle(arguments))
            return _text(f"{system}\n\n---\n\n{user}")

        elif name == "validate_trace":
            variant = Variant(arguments.get("variant", Variant.BASE.value))
            trace = validate_trace(
                repair_raw_output(arguments["raw"]),
                arguments.get("sample_id", "adhoc"),
                variant,
                arguments.get("model_id", "adhoc"),
            )
            signals = derive_signals(trace)
            fired = [s.value for s in Signal if signals.fires(s)]
            text = f"✅ Valid trace; signals fired: {', '.join(fired) or 'none'}"
            for warning in trace.warnings:
                text += f"\n⚠️ {warning}"
            return _text(text)

        elif name == "summarize_report":
            metrics_dir = Path(arguments["metrics_dir"])
            if not (metrics_dir / METRICS_FILE).exists():
                return _text(f"❌ No {METRICS_FILE} in {metrics_dir}; run evaluate first")
            signal = Signal(arguments.get("signal", Signal.IR.value))
            return _text(summary_table(read_metrics(metrics_dir), signal))

        else:
            return _text(f"❌ Unknown tool: {name}")

    except TraceBenchError as e:
        logger.warning(f"Tool {name} failed: {e.message}")
        return _text(f"❌ {e.code}: {e.message}")
    except Exception as e:
        logger.error(f"Error in tool {name}: {e}")
        return _text(f"❌ Error in {name}: {str(e)}")


async def main() -> None:
    """Main MCP server entry point."""
    logger.info("Starting artifact-trust-bench MCP server...")

    server = Server("artifact-trust-bench")

    @server.list_tools()
    async def list_tools() -> List[Tool]:
        return TOOLS

    @server.call_tool()
    async def call_tool(name: str, arguments: Dict[str, Any]) -> List[TextContent]:
        return await handle_call_tool(name, arguments)

    logger.info("MCP server ready, waiting for connections...")
    options = server.create_initialization_options()
    async with stdio_server() as (read_stream, write_stream):
        await server.run(read_stream, write_stream, options, raise_exceptions=True)
