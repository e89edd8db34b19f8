"""Shared test utilities: signal builders, independent oracles, SRT parser."""

from __future__ import annotations

import re

import numpy as np
from scipy.signal import butter, lfilter

from speakerkit.audio import AudioBuffer


def tone(freq_hz: float, dur_s: float, rate: int = 16000, amp: float = 0.5) -> np.ndarray:
    t = np.arange(int(round(dur_s * rate))) / rate
    return amp * np.sin(2 * np.pi * freq_hz * t)


def tone_buffer(freq_hz: float, dur_s: float, rate: int = 16000, amp: float = 0.5) -> AudioBuffer:
    return AudioBuffer(samples=tone(freq_hz, dur_s, rate, amp), sample_rate_hz=rate)


def band_noise(band: tuple[float, float], dur_s: float, rate: int = 16000, seed: int = 0, amp: float = 0.3) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    n = int(round(dur_s * rate))
    x = rng.standard_normal(n + rate // 2)
    b, a = butter(4, [band[0] / (rate / 2), band[1] / (rate / 2)], btype="band")
    y = lfilter(b, a, x)[rate // 4 :][: n]
    return AudioBuffer(samples=amp * y / (np.max(np.abs(y)) + 1e-12), sample_rate_hz=rate)


def random_unit(rng, dim: int = 48) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def ahc_oracle(vectors: list[np.ndarray], threshold: float, num_speakers: int | None = None) -> list[int]:
    """Naive O(n^3) average-linkage AHC under cosine distance.

    Recomputes every cluster-pair linkage from raw pairwise distances at each
    step; first lexicographic pair wins ties.
    """
    n = len(vectors)
    pair = [[1.0 - float(np.dot(vectors[i], vectors[j])) for j in range(n)] for i in range(n)]
    clusters = [[i] for i in range(n)]
    while len(clusters) > 1:
        if num_speakers is not None and len(clusters) <= num_speakers:
            break
        best_i = best_j = -1
        best_d = float("inf")
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                total = 0.0
                for a in clusters[i]:
                    for b in clusters[j]:
                        total += pair[a][b]
                d = total / (len(clusters[i]) * len(clusters[j]))
                if d < best_d:
                    best_d, best_i, best_j = d, i, j
        if num_speakers is None and best_d >= threshold:
            break
        clusters[best_i].extend(clusters[best_j])
        del clusters[best_j]
    labels = [0] * n
    for c, members in enumerate(clusters):
        for m in members:
            labels[m] = c
    return labels


def partition_sets(labels: list[int]) -> set[frozenset[int]]:
    groups: dict[int, set[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, set()).add(i)
    return {frozenset(g) for g in groups.values()}


_SRT_TIME = re.compile(r"^(\d{2}):(\d{2}):(\d{2}),(\d{3}) --> (\d{2}):(\d{2}):(\d{2}),(\d{3})$")


def parse_srt(text: str) -> list[tuple[int, float, float, str]]:
    """Independent SRT reader: (counter, start_s, end_s, cue_text)."""
    cues = []
    blocks = [b for b in text.split("\n\n") if b.strip()]
    for block in blocks:
        lines = block.split("\n")
        counter = int(lines[0])
        m = _SRT_TIME.match(lines[1])
        assert m, f"bad timestamp line {lines[1]!r}"
        h1, m1, s1, ms1, h2, m2, s2, ms2 = map(int, m.groups())
        start = h1 * 3600 + m1 * 60 + s1 + ms1 / 1000.0
        end = h2 * 3600 + m2 * 60 + s2 + ms2 / 1000.0
        cues.append((counter, start, end, "\n".join(lines[2:]).strip()))
    return cues
