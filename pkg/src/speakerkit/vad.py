"""Energy-based voice activity detection and interval utilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer, FrameSpec, TimeInterval, n_frames

# Frames at/below this absolute level are hard non-speech and do not
# participate in the noise-floor percentile; keeps decisions covariant
# under prepended digital silence.
SILENCE_GATE_DB = -90.0


@dataclass(frozen=True)
class VadParams:
    margin_db: float = 9.0
    floor_percentile: float = 10.0
    min_speech_s: float = 0.3
    min_gap_s: float = 0.3
    pad_s: float = 0.05

    def __post_init__(self):
        if not (0 < self.floor_percentile < 50):
            raise ValueError("floor_percentile must be in (0, 50)")
        if min(self.min_speech_s, self.min_gap_s, self.pad_s) < 0:
            raise ValueError("durations must be >= 0")


def frame_energies_db(buf: AudioBuffer, spec: FrameSpec | None = None) -> np.ndarray:
    """Per-frame RMS energy in dB (10*log10 of mean power)."""
    spec = spec or FrameSpec()
    rate = buf.sample_rate_hz
    win = int(round(spec.win_s * rate))
    hop = int(round(spec.hop_s * rate))
    frames = n_frames(len(buf.samples), win, hop)
    if frames == 0:
        return np.zeros(0)
    idx = np.arange(win)[None, :] + hop * np.arange(frames)[:, None]
    power = np.mean(buf.samples[idx] ** 2, axis=1)
    return 10.0 * np.log10(power + 1e-10)


def merge_intervals(ivs: list[TimeInterval]) -> list[TimeInterval]:
    """Union of intervals as a sorted disjoint list."""
    out: list[TimeInterval] = []
    for iv in sorted(ivs, key=lambda i: (i.start_s, i.end_s)):
        if out and iv.start_s <= out[-1].end_s:
            if iv.end_s > out[-1].end_s:
                out[-1] = TimeInterval(out[-1].start_s, iv.end_s)
        else:
            out.append(iv)
    return out


def detect_speech(buf: AudioBuffer, params: VadParams | None = None) -> list[TimeInterval]:
    """Speech intervals from frame energies vs. a percentile noise floor."""
    params = params or VadParams()
    spec = FrameSpec()
    e = frame_energies_db(buf, spec)
    if len(e) == 0:
        return []

    active = e > SILENCE_GATE_DB
    if not np.any(active):
        return []
    floor = np.percentile(e[active], params.floor_percentile)
    speech = active & (e > floor + params.margin_db)

    hop, win = spec.hop_s, spec.win_s
    runs: list[tuple[int, int]] = []
    start = None
    for i, s in enumerate(speech):
        if s and start is None:
            start = i
        elif not s and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(speech) - 1))

    ivs = [TimeInterval(a * hop, b * hop + win) for a, b in runs]
    ivs = [iv for iv in ivs if iv.duration_s >= params.min_speech_s]

    # merge gaps shorter than min_gap_s
    kept: list[TimeInterval] = []
    for iv in ivs:
        if kept and iv.start_s - kept[-1].end_s < params.min_gap_s:
            kept[-1] = TimeInterval(kept[-1].start_s, iv.end_s)
        else:
            kept.append(iv)

    dur = buf.duration_s
    padded = [
        TimeInterval(max(0.0, iv.start_s - params.pad_s), min(dur, iv.end_s + params.pad_s))
        for iv in kept
    ]
    return merge_intervals(padded)


def vad_from_diarization(d) -> list[TimeInterval]:
    """Collapse diarization segments to plain speech/non-speech intervals."""
    return merge_intervals([iv for iv, _ in d.segments])
