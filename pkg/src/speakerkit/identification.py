"""Open/closed-set speaker identification over enrolled speaker sets."""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field, replace

from .audio import AudioBuffer, TimeInterval
from .diarization import DiarizationOutput, Subsegment
from .embedding import EmbeddingBackend, SpeakerEmbedding, cosine_score, mean_embedding
from .errors import BackendMismatch, EmptySet


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: str
    display_name: str
    reference: SpeakerEmbedding
    n_utterances: int
    enrolled_at: float


@dataclass
class SpeakerSet:
    set_id: str
    backend_id: str
    profiles: list[SpeakerProfile] = field(default_factory=list)  # enrollment order


@dataclass(frozen=True)
class IdentificationParams:
    open_set: bool = True
    threshold: float = 0.6


@dataclass(frozen=True)
class IdentityDecision:
    kind: str  # "known" | "unknown"
    scores: dict[str, float]
    speaker_id: str | None = None
    score: float | None = None
    unknown_index: int | None = None


@dataclass(frozen=True)
class LabeledSegment:
    interval: TimeInterval
    label: str  # final display label
    cluster: str  # source diarization cluster
    decision: IdentityDecision


@dataclass(frozen=True)
class LabeledDiarization:
    segments: list[LabeledSegment] = field(default_factory=list)
    decisions: dict[str, IdentityDecision] = field(default_factory=dict)  # per cluster


def _slug(name: str) -> str:
    s = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return s or "speaker"


def enroll(
    speaker_set: SpeakerSet,
    display_name: str,
    utterances: list[AudioBuffer],
    backend: EmbeddingBackend,
) -> SpeakerProfile:
    """Compute a reference embedding from sample utterances and register it."""
    if backend.id != speaker_set.backend_id:
        raise BackendMismatch(f"set expects {speaker_set.backend_id}, backend is {backend.id}")
    embs = [backend.extract(u) for u in utterances]
    reference = mean_embedding(embs)
    base = _slug(display_name)
    existing = {p.speaker_id for p in speaker_set.profiles}
    speaker_id = base
    k = 2
    while speaker_id in existing:
        speaker_id = f"{base}-{k}"
        k += 1
    profile = SpeakerProfile(
        speaker_id=speaker_id,
        display_name=display_name,
        reference=reference,
        n_utterances=len(utterances),
        enrolled_at=time.time(),
    )
    speaker_set.profiles.append(profile)
    return profile


def identify(
    centroid: SpeakerEmbedding,
    speaker_set: SpeakerSet,
    params: IdentificationParams | None = None,
) -> IdentityDecision:
    """Best-scoring enrolled identity; unknown below threshold in open-set mode.

    Ties go to the earliest profile in enrollment order. Unknown indices are
    assigned later by assign_labels.
    """
    params = params or IdentificationParams()
    if not speaker_set.profiles:
        if params.open_set:
            return IdentityDecision(kind="unknown", scores={})
        raise EmptySet(f"speaker set {speaker_set.set_id!r} has no profiles")

    scores = {p.speaker_id: cosine_score(centroid, p.reference) for p in speaker_set.profiles}
    best = max(speaker_set.profiles, key=lambda p: scores[p.speaker_id])
    # max() keeps the first maximal profile, i.e. enrollment order wins ties
    best_score = scores[best.speaker_id]
    if params.open_set and best_score < params.threshold:
        return IdentityDecision(kind="unknown", scores=scores)
    return IdentityDecision(kind="known", scores=scores, speaker_id=best.speaker_id, score=best_score)


def assign_labels(
    d: DiarizationOutput,
    speaker_set: SpeakerSet,
    params: IdentificationParams | None = None,
) -> LabeledDiarization:
    """One identification per cluster centroid; unknowns numbered Speaker1..N
    in order of first temporal appearance."""
    params = params or IdentificationParams()
    decisions = {c: identify(emb, speaker_set, params) for c, emb in d.centroids.items()}
    display = {p.speaker_id: p.display_name for p in speaker_set.profiles}

    labels: dict[str, str] = {}
    n_unknown = 0
    for _, cluster in d.segments:
        if cluster in labels:
            continue
        dec = decisions[cluster]
        if dec.kind == "known":
            labels[cluster] = display[dec.speaker_id]
        else:
            n_unknown += 1
            dec = replace(dec, unknown_index=n_unknown)
            decisions[cluster] = dec
            labels[cluster] = f"Speaker{n_unknown}"

    segments = [
        LabeledSegment(interval=iv, label=labels[c], cluster=c, decision=decisions[c])
        for iv, c in d.segments
    ]
    return LabeledDiarization(segments=segments, decisions=decisions)


def refine_centroid(subsegs: list[Subsegment], overlap: list[TimeInterval]) -> SpeakerEmbedding:
    """Centroid over subsegments clear of overlapped speech; falls back to all."""
    if not subsegs:
        raise ValueError("refine_centroid needs at least one subsegment")
    clean = [
        s for s in subsegs
        if not any(s.interval.overlap_s(ov) > 0 for ov in overlap)
    ]
    if not clean:
        clean = subsegs
    return mean_embedding([s.embedding for s in clean])
