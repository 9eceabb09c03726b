"""Description fidelity: cosine between signal texts and the ground-truth summary."""

import logging
import os
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple

import httpx
import numpy as np
from pydantic import BaseModel

from ..config import EmbedderSettings
from ..errors import EmbedderUnavailable, MetricUndefined
from ..trace.signals import SignalVector
from ..types import CONFLICT_SIGNALS, Signal

logger = logging.getLogger(__name__)


def _normalize(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    return np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 0)


class Embedder(ABC):
    """Text to fixed-dimension, unit-normalized vectors."""

    name = "embedder"

    @abstractmethod
    def _encode(self, texts: List[str]) -> np.ndarray:
        """Raw vectors, one row per text."""

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, 0))
        return _normalize(np.asarray(self._encode(list(texts)), dtype=float))


class SentenceTransformerEmbedder(Embedder):
    def __init__(self, model: str = "BAAI/bge-base-en-v1.5"):
        self.name = model
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as e:
            raise EmbedderUnavailable(
                "sentence-transformers is not installed (pip install '.[embeddings]')"
            ) from e
        try:
            self._model = SentenceTransformer(model)
        except OSError as e:
            raise EmbedderUnavailable(f"cannot load embedding model {model}: {e}") from e

    def _encode(self, texts: List[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(
                texts, convert_to_numpy=True, normalize_embeddings=True, show_progress_bar=False
            )
        )


class HttpEmbedder(Embedder):
    """OpenAI-compatible ``/embeddings`` service."""

    def __init__(
        self, url: str, model: str, api_key_env: Optional[str] = None, timeout: float = 60
    ):
        self.name = model
        self.url = f"{url.rstrip('/')}/embeddings"
        self.model = model
        self.api_key_env = api_key_env
        self._client = httpx.Client(timeout=timeout)

    def _encode(self, texts: List[str]) -> np.ndarray:
        headers = {}
        if self.api_key_env:
            headers["Authorization"] = f"Bearer {os.environ.get(self.api_key_env, '')}"
        try:
            response = self._client.post(
                self.url, json={"model": self.model, "input": texts}, headers=headers
            )
            response.raise_for_status()
            data: List[Dict[str, Any]] = response.json()["data"]
        except (httpx.HTTPError, KeyError, ValueError) as e:
            raise EmbedderUnavailable(f"embedding service {self.url} failed: {e}") from e
        ordered = sorted(data, key=lambda item: item.get("index", 0))
        return np.asarray([item["embedding"] for item in ordered], dtype=float)


class HashingEmbedder(Embedder):
    """Offline bag-of-words vectors; deterministic, no model download."""

    name = "hashing"

    def __init__(self, n_features: int = 2**12):
        from sklearn.feature_extraction.text import HashingVectorizer

        self._vectorizer = HashingVectorizer(
            n_features=n_features, alternate_sign=False, norm="l2", ngram_range=(1, 2)
        )

    def _encode(self, texts: List[str]) -> np.ndarray:
        return np.asarray(self._vectorizer.transform(texts).toarray())


def open_embedder(settings: EmbedderSettings) -> Embedder:
    """Build the configured backend; raises EmbedderUnavailable when it cannot run."""
    if settings.backend == "hashing":
        return HashingEmbedder(settings.n_features)
    if settings.backend == "http":
        if not settings.url:
            raise EmbedderUnavailable("http embedder needs embedder.url")
        return HttpEmbedder(settings.url, settings.model, settings.api_key_env)
    return SentenceTransformerEmbedder(settings.model)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return float(np.dot(a, b) / denom)


def text_similarity(left: str, right: str, embedder: Embedder) -> float:
    if not left.strip() or not right.strip():
        return 0.0
    vectors = embedder.embed([left, right])
    return cosine(vectors[0], vectors[1])


class SimilarityScores(BaseModel):
    per_signal: Dict[Signal, float]
    combined: float


def description_similarity(
    signals: SignalVector,
    ground_truth_summary: str,
    embedder: Embedder,
    combined: str = "concat",
) -> SimilarityScores:
    """Per-signal cosine for fired signals (0 otherwise) and the combined score.

    ``combined="concat"`` embeds the fired texts joined in PCA, IC, IR order;
    ``"mean"`` averages the fired per-signal cosines.
    """
    per_signal = {
        s: text_similarity(signals.text(s), ground_truth_summary, embedder)
        if signals.fires(s)
        else 0.0
        for s in CONFLICT_SIGNALS
    }
    fired = [s for s in CONFLICT_SIGNALS if signals.fires(s)]
    if not fired:
        overall = 0.0
    elif combined == "mean":
        overall = float(np.mean([per_signal[s] for s in fired]))
    else:
        overall = text_similarity(signals.combined_text(), ground_truth_summary, embedder)
    return SimilarityScores(per_signal=per_signal, combined=overall)


def similarity_gap(
    detected: Sequence[float], missed: Sequence[float]
) -> Tuple[float, float, float]:
    """(mean detected, mean missed, detected - missed) combined cosine."""
    if not detected or not missed:
        raise MetricUndefined(
            "similarity gap needs both detected and missed records",
            {"n_detected": len(detected), "n_missed": len(missed)},
        )
    mean_detected = float(np.mean(detected))
    mean_missed = float(np.mean(missed))
    return mean_detected, mean_missed, mean_detected - mean_missed
