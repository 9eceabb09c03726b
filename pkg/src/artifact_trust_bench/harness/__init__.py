"""Blind elicitation: endpoints, prompts, the trace store and the matrix runner."""

from .endpoints import (
    ChatEndpoint,
    ChatRequest,
    HttpChatEndpoint,
    complete_with_retry,
    open_endpoint,
)
from .prompts import SYSTEM_PROMPT, render_blind_prompt, scan_for_leaks
from .runner import RunSummary, check_manifest, run_matrix
from .store import FailureRecord, RunKey, StoredTrace, TraceStore

__all__ = [
    "SYSTEM_PROMPT",
    "ChatEndpoint",
    "ChatRequest",
    "FailureRecord",
    "HttpChatEndpoint",
    "RunKey",
    "RunSummary",
    "StoredTrace",
    "TraceStore",
    "check_manifest",
    "complete_with_retry",
    "open_endpoint",
    "render_blind_prompt",
    "run_matrix",
    "scan_for_leaks",
]
