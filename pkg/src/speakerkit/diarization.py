"""Who-spoke-when: windowing, agglomerative clustering, segment assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer, TimeInterval, slice_buffer
from .embedding import EmbeddingBackend, SpeakerEmbedding, cosine_score, mean_embedding
from .errors import EmptyInput, LengthMismatch
from .vad import VadParams, detect_speech


@dataclass(frozen=True)
class DiarizationParams:
    window_s: float = 1.5
    hop_s: float = 0.75
    min_subseg_s: float = 0.5
    ahc_threshold: float = 0.4  # cosine-distance stop
    num_speakers: int | None = None

    def __post_init__(self):
        if self.hop_s > self.window_s:
            raise ValueError("hop_s must be <= window_s")
        if not (0 < self.ahc_threshold < 2):
            raise ValueError("ahc_threshold must be in (0, 2)")


@dataclass(frozen=True)
class Subsegment:
    interval: TimeInterval
    embedding: SpeakerEmbedding


@dataclass(frozen=True)
class DiarizationOutput:
    segments: list[tuple[TimeInterval, str]] = field(default_factory=list)
    centroids: dict[str, SpeakerEmbedding] = field(default_factory=dict)
    # subsegments per cluster label, kept for centroid refinement
    members: dict[str, list[Subsegment]] = field(default_factory=dict)


def subsegment(speech: list[TimeInterval], params: DiarizationParams | None = None) -> list[TimeInterval]:
    """Tile each speech interval with fixed windows; windows never cross intervals."""
    params = params or DiarizationParams()
    out: list[TimeInterval] = []
    for iv in speech:
        t = iv.start_s
        while t < iv.end_s - 1e-9:
            end = min(t + params.window_s, iv.end_s)
            length = end - t
            if length >= params.window_s - 1e-9 or length >= params.min_subseg_s:
                out.append(TimeInterval(t, end))
            if end >= iv.end_s - 1e-9:
                break
            t += params.hop_s
    return out


def _avg_linkage(dist: np.ndarray, a: list[int], b: list[int]) -> float:
    return float(np.mean(dist[np.ix_(a, b)]))


def ahc_cluster(embeddings: list[SpeakerEmbedding], params: DiarizationParams | None = None) -> list[int]:
    """Average-linkage AHC under cosine distance.

    Merges while the minimum linkage is below the threshold, or down to
    num_speakers when that is set. Ties break on the lexicographically
    smallest cluster-index pair, so results are order-deterministic.
    """
    params = params or DiarizationParams()
    n = len(embeddings)
    if n == 0:
        raise EmptyInput("ahc_cluster of empty list")

    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = 1.0 - cosine_score(embeddings[i], embeddings[j])
            dist[i, j] = dist[j, i] = d

    clusters: list[list[int]] = [[i] for i in range(n)]
    target = params.num_speakers
    while len(clusters) > 1:
        if target is not None and len(clusters) <= target:
            break
        best = None
        best_d = np.inf
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = _avg_linkage(dist, clusters[i], clusters[j])
                if d < best_d:
                    best_d = d
                    best = (i, j)
        if target is None and best_d >= params.ahc_threshold:
            break
        i, j = best
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]

    labels = [0] * n
    for c, members in enumerate(clusters):
        for m in members:
            labels[m] = c
    return labels


def assemble(subsegs: list[Subsegment], labels: list[int]) -> DiarizationOutput:
    """Merge same-label neighbors; split conflicting overlaps at the midpoint."""
    if len(subsegs) != len(labels):
        raise LengthMismatch(f"{len(subsegs)} subsegments vs {len(labels)} labels")
    if not subsegs:
        return DiarizationOutput()

    order = sorted(range(len(subsegs)), key=lambda i: (subsegs[i].interval.start_s, subsegs[i].interval.end_s))
    subsegs = [subsegs[i] for i in order]
    labels = [labels[i] for i in order]

    # resolve overlap between different-label neighbors at the overlap midpoint
    bounds = [[s.interval.start_s, s.interval.end_s] for s in subsegs]
    for i in range(len(subsegs) - 1):
        if labels[i] != labels[i + 1] and bounds[i][1] > bounds[i + 1][0]:
            mid = (bounds[i + 1][0] + bounds[i][1]) / 2.0
            bounds[i][1] = mid
            bounds[i + 1][0] = mid

    merged: list[tuple[float, float, int]] = []
    for (s, e), lab in zip(bounds, labels):
        if e <= s:
            continue
        if merged and merged[-1][2] == lab and s <= merged[-1][1] + 1e-9:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e), lab)
        else:
            merged.append((s, e, lab))

    # rename clusters C1..Ck by first temporal appearance
    name_of: dict[int, str] = {}
    for _, _, lab in merged:
        if lab not in name_of:
            name_of[lab] = f"C{len(name_of) + 1}"

    segments = [(TimeInterval(s, e), name_of[lab]) for s, e, lab in merged]
    members: dict[str, list[Subsegment]] = {}
    for sub, lab in zip(subsegs, labels):
        members.setdefault(name_of[lab], []).append(sub)
    centroids = {name: mean_embedding([s.embedding for s in subs]) for name, subs in members.items()}
    return DiarizationOutput(segments=segments, centroids=centroids, members=members)


def diarize(
    buf: AudioBuffer,
    backend: EmbeddingBackend,
    vad_params: VadParams | None = None,
    params: DiarizationParams | None = None,
    speech: list[TimeInterval] | None = None,
) -> DiarizationOutput:
    """Full pipeline: VAD, windowing, embedding, clustering, assembly."""
    params = params or DiarizationParams()
    if speech is None:
        speech = detect_speech(buf, vad_params)
    windows = subsegment(speech, params)
    if not windows:
        return DiarizationOutput()
    subsegs = [Subsegment(iv, backend.extract(slice_buffer(buf, iv))) for iv in windows]
    labels = ahc_cluster([s.embedding for s in subsegs], params)
    return assemble(subsegs, labels)
