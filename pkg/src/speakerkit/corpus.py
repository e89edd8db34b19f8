"""Synthetic multi-speaker corpus generator for tests and demos.

Voices are band-limited noise with disjoint bands, which the statistical
embedding backend separates cleanly. Output is deterministic per seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import butter, lfilter

from .audio import CANONICAL_RATE, AudioBuffer, TimeInterval, encode_wav
from .metrics import RttmRecord, write_rttm

# Disjoint pass bands (Hz), one per voice; cycled if voices > len
VOICE_BANDS = [
    (300.0, 900.0),
    (1500.0, 3000.0),
    (4500.0, 6500.0),
    (1000.0, 1300.0),
    (3400.0, 4100.0),
]


@dataclass
class SyntheticCorpus:
    buffer: AudioBuffer
    records: list[RttmRecord]
    identity_map: dict[str, str]  # rttm speaker name -> voice id
    enrollment: dict[str, list[AudioBuffer]]  # voice id -> held-out clips
    overlap: list[TimeInterval] = field(default_factory=list)


def _voice_noise(rng: np.ndarray, band: tuple[float, float], n: int, rate: int) -> np.ndarray:
    x = rng.standard_normal(n + 2 * rate // 10)
    b, a = butter(4, [band[0] / (rate / 2), band[1] / (rate / 2)], btype="band")
    y = lfilter(b, a, x)[rate // 5 :][:n]  # drop filter transient
    y = y / (np.max(np.abs(y)) + 1e-12)
    return 0.3 * y


def generate_corpus(
    voices: int = 3,
    turns: int = 8,
    turn_s: float = 2.0,
    gap_s: float = 0.4,
    overlap: float = 0.0,
    noise_floor_db: float | None = -60.0,
    seed: int = 1234,
    file_id: str = "synthetic",
    rate: int = CANONICAL_RATE,
) -> SyntheticCorpus:
    """Round-robin speaker turns with silence gaps plus held-out enrollment clips.

    `turns` is per voice; `overlap` > 0 extends each turn into the next by
    that many seconds and records the overlapped span.
    """
    rng = np.random.default_rng(seed)
    names = [f"V{i + 1}" for i in range(voices)]
    bands = [VOICE_BANDS[i % len(VOICE_BANDS)] for i in range(voices)]

    total_turns = voices * turns
    dur = total_turns * (turn_s + gap_s) + gap_s
    n_total = int(round(dur * rate))
    if noise_floor_db is not None:
        sig = 10 ** (noise_floor_db / 20.0) * rng.standard_normal(n_total)
    else:
        sig = np.zeros(n_total)

    records = []
    overlaps = []
    t = gap_s
    for k in range(total_turns):
        v = k % voices
        start, end = t, t + turn_s
        ext_end = min(end + overlap, dur) if overlap > 0 else end
        i0, i1 = int(round(start * rate)), int(round(ext_end * rate))
        sig[i0:i1] += _voice_noise(rng, bands[v], i1 - i0, rate)
        records.append(RttmRecord(file_id=file_id, onset_s=round(start, 3), duration_s=round(ext_end - start, 3), speaker_name=names[v]))
        if overlap > 0 and ext_end > end:
            overlaps.append(TimeInterval(end, ext_end))
        t += turn_s + gap_s

    sig = np.clip(sig, -1.0, 1.0)
    buffer = AudioBuffer(samples=sig, sample_rate_hz=rate)

    enrollment = {}
    for v, name in enumerate(names):
        clips = []
        for _ in range(2):
            n = int(round(3.0 * rate))
            clips.append(AudioBuffer(samples=_voice_noise(rng, bands[v], n, rate), sample_rate_hz=rate))
        enrollment[name] = clips

    return SyntheticCorpus(
        buffer=buffer,
        records=records,
        identity_map={n: n for n in names},
        enrollment=enrollment,
        overlap=overlaps,
    )


def write_corpus(corpus: SyntheticCorpus, out_dir: str | Path) -> dict[str, Path]:
    """Write corpus.wav, ref.rttm, identities.json, enrollment clips, overlap map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    wav_path = out / "corpus.wav"
    wav_path.write_bytes(encode_wav(corpus.buffer))
    paths["wav"] = wav_path

    rttm_path = out / "ref.rttm"
    rttm_path.write_text(write_rttm(corpus.records))
    paths["rttm"] = rttm_path

    ids_path = out / "identities.json"
    ids_path.write_text(json.dumps(corpus.identity_map, indent=2, sort_keys=True))
    paths["identities"] = ids_path

    enroll_dir = out / "enroll"
    enroll_dir.mkdir(exist_ok=True)
    for name, clips in corpus.enrollment.items():
        for i, clip in enumerate(clips, start=1):
            (enroll_dir / f"{name}_{i}.wav").write_bytes(encode_wav(clip))
    paths["enroll_dir"] = enroll_dir

    if corpus.overlap:
        ov_path = out / "overlap.json"
        ov_path.write_text(json.dumps(
            [{"start_s": iv.start_s, "end_s": iv.end_s} for iv in corpus.overlap], indent=2
        ))
        paths["overlap"] = ov_path
    return paths
