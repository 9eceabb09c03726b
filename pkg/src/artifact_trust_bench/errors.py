"""Error types shared across the pipeline.

Every error carries a stable ``code`` so the CLI and the MCP server can emit a
machine-readable failure summary.
"""

from typing import Any, Dict, List, Optional, Tuple


class TraceBenchError(Exception):
    """Base class for all pipeline errors."""

    code = "ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class ConfigError(TraceBenchError):
    code = "CONFIG_INVALID"


class PrerequisiteError(TraceBenchError):
    code = "PREREQUISITE_MISSING"

    def __init__(self, stage: str, missing: List[str]):
        super().__init__(
            f"Stage '{stage}' is missing prerequisite outputs: {', '.join(missing)}",
            {"stage": stage, "missing": missing},
        )
        self.missing = missing


# trace-schema


class ParseFailure(TraceBenchError):
    code = "PARSE_FAILURE"

    def __init__(self, message: str, raw: str):
        super().__init__(message, {"raw": raw})
        self.raw = raw


class TraceValidationError(TraceBenchError):
    """A candidate trace violated the schema at ``path``."""

    code = "TRACE_INVALID"

    def __init__(self, path: str, message: str):
        super().__init__(f"{self.code}({path}): {message}", {"path": path})
        self.path = path


class MissingFieldError(TraceValidationError):
    code = "MISSING_FIELD"


class OutOfRangeError(TraceValidationError):
    code = "OUT_OF_RANGE"


class DuplicateSourceError(TraceValidationError):
    code = "DUPLICATE_SOURCE"


class BadEnumError(TraceValidationError):
    code = "BAD_ENUM"


# perturbation-engine


class MutationRejected(TraceBenchError):
    """A mutation reply failed validation and should be re-requested."""

    code = "MUTATION_REJECTED"

    def __init__(self, message: str, sample_id: str, reply: Dict[str, Any]):
        super().__init__(message, {"sample_id": sample_id, "reply": reply})
        self.sample_id = sample_id
        self.reply = reply


class SignatureChanged(MutationRejected):
    code = "SIGNATURE_CHANGED"


class NoEffectiveChange(MutationRejected):
    code = "NO_EFFECTIVE_CHANGE"


class MarkerLeak(MutationRejected):
    code = "MARKER_LEAK"


class MissingMetadata(MutationRejected):
    code = "MISSING_METADATA"


class MutationRequestError(TraceBenchError):
    """A mutation request was malformed before any endpoint call."""

    code = "MUTATION_REQUEST_INVALID"


class IncompleteMatrixError(TraceBenchError):
    code = "INCOMPLETE_MATRIX"

    def __init__(self, missing: List[Tuple[str, str]]):
        super().__init__(
            f"Variant matrix is missing {len(missing)} (sample_id, variant) pairs",
            {"missing": [list(pair) for pair in missing]},
        )
        self.missing = missing


# elicitation-harness


class LeakAbort(TraceBenchError):
    code = "LEAK_ABORT"


class DuplicateKeyError(TraceBenchError):
    code = "DUPLICATE_KEY"


class StoreCorrupted(TraceBenchError):
    code = "STORE_CORRUPTED"


class PromptDriftError(TraceBenchError):
    code = "PROMPT_DRIFT"


class EndpointError(TraceBenchError):
    code = "ENDPOINT_ERROR"


class TransientEndpointError(EndpointError):
    code = "TRANSIENT_ENDPOINT"


class PermanentRefusal(EndpointError):
    code = "PERMANENT_REFUSAL"


# metrics-core


class MetricUndefined(TraceBenchError):
    code = "METRIC_UNDEFINED"


class EmbedderUnavailable(TraceBenchError):
    code = "EMBEDDER_UNAVAILABLE"
