"""Speaker embeddings: backend interface, deterministic baseline, cosine scoring.

The baseline backend summarizes log-mel statistics; external extractors can
be plugged in through the registry without touching callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .audio import AudioBuffer, FrameSpec, log_mel
from .errors import BackendMismatch, DegenerateMean, EmptyInput, TooShort

MIN_EXTRACT_S = 0.2


@dataclass(frozen=True)
class SpeakerEmbedding:
    values: np.ndarray
    backend_id: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding components must be finite")
        if abs(np.linalg.norm(v) - 1.0) > 1e-6:
            raise ValueError("embedding must be unit-norm")

    @property
    def dim(self) -> int:
        return len(self.values)


class EmbeddingBackend(Protocol):
    id: str
    dim: int

    def extract(self, buf: AudioBuffer) -> SpeakerEmbedding: ...


def _unit(v: np.ndarray, backend_id: str) -> SpeakerEmbedding:
    n = np.linalg.norm(v)
    if n < 1e-12:
        e1 = np.zeros(len(v))
        e1[0] = 1.0
        return SpeakerEmbedding(values=e1, backend_id=backend_id)
    return SpeakerEmbedding(values=v / n, backend_id=backend_id)


class BaselineBackend:
    """Log-mel mean/std statistics backend: deterministic, training-free."""

    def __init__(self, spec: FrameSpec | None = None):
        self.spec = spec or FrameSpec()
        self.id = "baseline-melstats"
        self.dim = 2 * self.spec.n_mels

    def extract(self, buf: AudioBuffer) -> SpeakerEmbedding:
        if buf.duration_s < MIN_EXTRACT_S:
            raise TooShort(f"need >= {MIN_EXTRACT_S} s, got {buf.duration_s:.3f} s")
        feats = log_mel(buf, self.spec).values
        v = np.concatenate([feats.mean(axis=0), feats.std(axis=0)])
        v = v - v.mean()
        return _unit(v, self.id)


def cosine_score(a: SpeakerEmbedding, b: SpeakerEmbedding) -> float:
    if a.backend_id != b.backend_id or a.dim != b.dim:
        raise BackendMismatch(f"{a.backend_id}/{a.dim} vs {b.backend_id}/{b.dim}")
    return float(np.clip(np.dot(a.values, b.values), -1.0, 1.0))


def mean_embedding(embs: list[SpeakerEmbedding]) -> SpeakerEmbedding:
    if not embs:
        raise EmptyInput("mean_embedding of empty list")
    backend = embs[0].backend_id
    for e in embs[1:]:
        if e.backend_id != backend:
            raise BackendMismatch(f"{e.backend_id} vs {backend}")
    m = np.mean([e.values for e in embs], axis=0)
    if np.linalg.norm(m) < 1e-8:
        raise DegenerateMean("embeddings cancel to near-zero mean")
    return _unit(m, backend)


_REGISTRY: dict[str, Callable[[], EmbeddingBackend]] = {
    "baseline-melstats": BaselineBackend,
}


def register_backend(backend_id: str, factory: Callable[[], EmbeddingBackend]) -> None:
    _REGISTRY[backend_id] = factory


def get_backend(backend_id: str) -> EmbeddingBackend:
    if backend_id not in _REGISTRY:
        raise KeyError(f"unknown embedding backend {backend_id!r}")
    return _REGISTRY[backend_id]()
