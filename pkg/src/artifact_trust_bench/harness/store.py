"""Append-only trace store with a failure ledger.

Two record-per-line files live in the store directory: ``traces.jsonl`` (at
most one record per run key) and ``failures.jsonl`` (history of ledgered
failures). The key index is rebuilt from ``traces.jsonl`` on open; a torn last
line left by a crash is cut off so the cell is fetched again on resume.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterator, NamedTuple, Optional, Set

from pydantic import BaseModel, ConfigDict, Field

from ..archive import dump_line
from ..errors import DuplicateKeyError, StoreCorrupted
from ..types import Variant

logger = logging.getLogger(__name__)

TRACES_FILE = "traces.jsonl"
FAILURES_FILE = "failures.jsonl"


class RunKey(NamedTuple):
    model_id: str
    variant: Variant
    sample_id: str

    def as_id(self) -> str:
        return f"{self.model_id}|{self.variant.value}|{self.sample_id}"

    @classmethod
    def parse(cls, text: str) -> "RunKey":
        model_id, variant, sample_id = text.split("|", 2)
        return cls(model_id, Variant(variant), sample_id)


class StoredTrace(BaseModel):
    """One retained cell: inputs, provenance and the validated trace."""

    model_config = ConfigDict(frozen=True)

    model_id: str
    variant: Variant
    sample_id: str
    bundle: Dict[str, Optional[str]]
    provenance: Dict[str, Any]
    trace: Dict[str, Any]
    overall_confidence: float = Field(ge=0.0, le=1.0)
    warnings: list = Field(default_factory=list)
    repaired: bool = False
    attempts: int = Field(default=1, ge=1)

    @property
    def key(self) -> RunKey:
        return RunKey(self.model_id, self.variant, self.sample_id)


class FailureRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_id: str
    variant: Variant
    sample_id: str
    cause: str
    message: str
    attempts: int = Field(ge=0)
    raw: Optional[str] = None

    @property
    def key(self) -> RunKey:
        return RunKey(self.model_id, self.variant, self.sample_id)


def _recover_tail(path: Path) -> None:
    """Cut a torn final line; any other unreadable line is corruption."""
    data = path.read_bytes()
    if not data:
        return
    lines = data.split(b"\n")
    tail = lines[-1]
    complete = lines[:-1]
    for line_no, line in enumerate(complete, start=1):
        if not line.strip():
            continue
        try:
            json.loads(line)
        except json.JSONDecodeError as e:
            if line_no == len(complete) and not tail:
                tail = line
                complete = complete[:-1]
                break
            raise StoreCorrupted(
                f"{path}:{line_no}: unreadable record", {"path": str(path), "line": line_no}
            ) from e
    if tail:
        keep = sum(len(line) + 1 for line in complete)
        with path.open("r+b") as fh:
            fh.truncate(keep)
            fh.flush()
            os.fsync(fh.fileno())
        logger.warning(f"Truncated torn record at end of {path} ({len(tail)} bytes)")


class TraceStore:
    """Single-writer store; all appends go through one instance."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.traces_path = self.directory / TRACES_FILE
        self.failures_path = self.directory / FAILURES_FILE
        self._index: Set[str] = set()
        for path in (self.traces_path, self.failures_path):
            path.touch(exist_ok=True)
            _recover_tail(path)
        for record in self.iter_traces():
            self._index.add(record.key.as_id())
        logger.info(f"Opened trace store {self.directory}: {len(self._index)} traces")

    def __contains__(self, key: object) -> bool:
        return isinstance(key, RunKey) and key.as_id() in self._index

    def __len__(self) -> int:
        return len(self._index)

    def _append_line(self, path: Path, record: BaseModel) -> None:
        with path.open("a", encoding="utf-8") as fh:
            fh.write(dump_line(record) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def append(self, record: StoredTrace) -> None:
        """Durably append one trace; a key already present raises DuplicateKeyError."""
        key_id = record.key.as_id()
        if key_id in self._index:
            raise DuplicateKeyError(f"trace already stored for {key_id}", {"key": key_id})
        self._append_line(self.traces_path, record)
        self._index.add(key_id)

    def record_failure(self, failure: FailureRecord) -> None:
        self._append_line(self.failures_path, failure)

    def get(self, key: RunKey) -> Optional[StoredTrace]:
        if key not in self:
            return None
        return next((r for r in self.iter_traces() if r.key == key), None)

    def iter_traces(self) -> Iterator[StoredTrace]:
        with self.traces_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield StoredTrace.model_validate_json(line)

    def iter_failures(self) -> Iterator[FailureRecord]:
        with self.failures_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield FailureRecord.model_validate_json(line)

    def open_failures(self) -> Dict[str, FailureRecord]:
        """Latest ledgered failure per key that still has no stored trace."""
        latest: Dict[str, FailureRecord] = {}
        for failure in self.iter_failures():
            key_id = failure.key.as_id()
            if key_id not in self._index:
                latest[key_id] = failure
        return latest
