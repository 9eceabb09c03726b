"""Run configuration: one YAML file drives every stage."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .trace.validate import LabelBands
from .types import ALL_VARIANTS, Severity, Signal, Variant

logger = logging.getLogger(__name__)


class EndpointProfile(BaseModel):
    """How to reach one chat-completion endpoint and how hard to retry it.

    ``locator`` is an HTTP base URL or an ``auditor://`` URL. The API key is read
    at call time from the environment variable named by ``api_key_env``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    model_id: str = Field(min_length=1)
    locator: str = Field(min_length=1)
    api_key_env: Optional[str] = None
    concurrency: int = Field(default=4, ge=1)
    retry_limit: int = Field(default=5, ge=0)
    backoff_initial: float = Field(default=30.0, ge=0.0)
    backoff_multiplier: float = Field(default=2.0, ge=1.0)
    backoff_cap: float = Field(default=300.0, ge=0.0)
    max_tokens: int = Field(default=4096, ge=1)
    temperature: float = 0.0
    timeout: float = Field(default=300.0, gt=0.0)

    @field_validator("temperature")
    @classmethod
    def _greedy(cls, value: float) -> float:
        if value != 0.0:
            raise ValueError("temperature is fixed at 0.0")
        return value

    def backoff_delay(self, attempt: int) -> float:
        """Seconds to wait before retry number ``attempt`` (0-based)."""
        return float(min(self.backoff_initial * self.backoff_multiplier**attempt, self.backoff_cap))


class MutationSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    endpoint: EndpointProfile = EndpointProfile(
        model_id="auditor-mutator", locator="auditor://oracle"
    )
    max_attempts: int = Field(default=3, ge=1)


class EmbedderSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    backend: Literal["sentence-transformers", "http", "hashing"] = "sentence-transformers"
    model: str = "BAAI/bge-base-en-v1.5"
    url: Optional[str] = None
    api_key_env: Optional[str] = None
    n_features: int = Field(default=2**12, ge=16)
    combined: Literal["concat", "mean"] = "concat"


class AuditorPolicy(BaseModel):
    """Score policy of the reference auditor."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    base_score: float = Field(default=0.85, ge=0.0, le=1.0)
    penalties: Dict[Severity, float] = Field(
        default_factory=lambda: {
            Severity.SUBTLE: 0.10,
            Severity.NORMAL: 0.20,
            Severity.HEAVY: 0.35,
        }
    )
    removal_penalty: float = Field(default=0.20, ge=0.0, le=1.0)
    confidence: float = Field(default=0.90, ge=0.0, le=1.0)

    @field_validator("penalties")
    @classmethod
    def _all_tiers(cls, value: Dict[Severity, float]) -> Dict[Severity, float]:
        missing = [s.value for s in Severity if s not in value]
        if missing:
            raise ValueError(f"penalties missing tiers: {', '.join(missing)}")
        return value

    def penalty(self, severity: Optional[Severity]) -> float:
        return self.penalties[severity] if severity is not None else 0.0


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    corpus: Optional[Path] = None
    output_root: Path = Path("runs/default")
    seed: int = 0
    limit: Optional[int] = Field(default=None, ge=1)
    variants: List[Variant] = Field(default_factory=lambda: list(ALL_VARIANTS))
    models: List[EndpointProfile] = Field(default_factory=list)
    mutation: MutationSettings = MutationSettings()
    embedder: EmbedderSettings = EmbedderSettings()
    bands: LabelBands = LabelBands()
    auditor: AuditorPolicy = AuditorPolicy()
    primary_signal: Signal = Signal.IR

    @field_validator("models")
    @classmethod
    def _unique_models(cls, value: List[EndpointProfile]) -> List[EndpointProfile]:
        ids = [m.model_id for m in value]
        if len(ids) != len(set(ids)):
            raise ValueError("model_id values must be unique")
        return value

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(p) for p in first["loc"])
            raise ConfigError(
                f"invalid configuration at {location}: {first['msg']}",
                {"errors": e.errors(include_url=False, include_context=False)},
            ) from None

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"configuration file not found: {path}", {"path": str(path)})
        logger.info(f"Loading configuration from {path}")
        return cls.from_yaml(path.read_text(encoding="utf-8"))

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)

    def with_overrides(
        self,
        models: Optional[Sequence[str]] = None,
        variants: Optional[Sequence[str]] = None,
        limit: Optional[int] = None,
        seed: Optional[int] = None,
        out: Optional[Path] = None,
    ) -> Tuple["RunConfig", Dict[str, Any]]:
        """Apply command-line overrides; returns the new config and what changed."""
        update: Dict[str, Any] = {}
        if models:
            known = {m.model_id: m for m in self.models}
            unknown = [m for m in models if m not in known]
            if unknown:
                raise ConfigError(f"unknown model(s): {', '.join(unknown)}", {"unknown": unknown})
            update["models"] = [known[m] for m in models]
        if variants:
            try:
                update["variants"] = [Variant(v.strip().upper()) for v in variants]
            except ValueError as e:
                raise ConfigError(f"unknown variant: {e}") from None
        if limit is not None:
            update["limit"] = limit
        if seed is not None:
            update["seed"] = seed
        if out is not None:
            update["output_root"] = Path(out)
        if not update:
            return self, {}
        merged = self.model_dump()
        merged.update(update)
        try:
            config = RunConfig.model_validate(merged)
        except ValidationError as e:
            raise ConfigError(f"invalid override: {e.errors()[0]['msg']}") from None
        recorded = {
            "models": [m.model_id for m in config.models] if models else None,
            "variants": [v.value for v in config.variants] if variants else None,
            "limit": limit,
            "seed": seed,
            "out": str(out) if out is not None else None,
        }
        return config, {k: v for k, v in recorded.items() if v is not None}
