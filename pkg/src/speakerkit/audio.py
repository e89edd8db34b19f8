"""Audio decoding, resampling, slicing and log-mel features.

Everything downstream works on mono float buffers at the canonical
16 kHz rate; ingestion is WAV-only (PCM16 or IEEE float32).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import resample_poly

from .errors import MalformedContainer, OutOfRange, UnsupportedEncoding

CANONICAL_RATE = 16000


@dataclass(frozen=True)
class AudioBuffer:
    """Mono PCM samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer is mono: samples must be 1-D")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True)
class TimeInterval:
    start_s: float
    end_s: float

    def __post_init__(self):
        if self.start_s < 0:
            raise ValueError("start_s must be >= 0")
        if self.end_s <= self.start_s:
            raise ValueError("end_s must be > start_s")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def overlap_s(self, other: "TimeInterval") -> float:
        return max(0.0, min(self.end_s, other.end_s) - max(self.start_s, other.start_s))


@dataclass(frozen=True)
class FrameSpec:
    win_s: float = 0.025
    hop_s: float = 0.010
    n_mels: int = 24
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # None -> rate/2
    floor_db: float = -80.0

    def __post_init__(self):
        if not (0 < self.hop_s <= self.win_s):
            raise ValueError("need 0 < hop_s <= win_s")
        if self.n_mels < 1:
            raise ValueError("n_mels must be >= 1")


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # frames x bins, log-mel dB
    spec: FrameSpec = field(default_factory=FrameSpec)

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def bins(self) -> int:
        return self.values.shape[1]


def n_frames(n_samples: int, win: int, hop: int) -> int:
    """Closed-form frame count for a sliding window."""
    if n_samples < win:
        return 0
    return 1 + (n_samples - win) // hop


def decode_wav(data: bytes) -> AudioBuffer:
    """Decode a RIFF/WAVE container (PCM16 or float32, 1-2 channels).

    Stereo is downmixed by per-sample average. No resampling is done here.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer("not a RIFF/WAVE container")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (csize,) = struct.unpack("<I", data[pos + 4 : pos + 8])
        body = data[pos + 8 : pos + 8 + csize]
        if cid == b"fmt ":
            if csize < 16:
                raise MalformedContainer("fmt chunk too small")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            if len(body) < csize:
                raise MalformedContainer("data chunk truncated")
            pcm = body
        pos += 8 + csize + (csize & 1)  # chunks are word-aligned

    if fmt is None or pcm is None:
        raise MalformedContainer("missing fmt or data chunk")

    audio_format, channels, rate, _, _, bits = fmt
    if audio_format == 0xFFFE and len(data) >= 24:
        raise UnsupportedEncoding("WAVE_FORMAT_EXTENSIBLE not supported")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"unsupported channel count {channels}")
    if rate <= 0:
        raise MalformedContainer("non-positive sample rate")

    if audio_format == 1 and bits == 16:
        x = np.frombuffer(pcm[: len(pcm) - len(pcm) % (2 * channels)], dtype="<i2")
        x = x.astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        x = np.frombuffer(pcm[: len(pcm) - len(pcm) % (4 * channels)], dtype="<f4")
        x = x.astype(np.float64)
    else:
        raise UnsupportedEncoding(f"format tag {audio_format} / {bits} bit")

    if channels == 2:
        x = x.reshape(-1, 2).mean(axis=1)
    x = np.clip(x, -1.0, 1.0)
    return AudioBuffer(samples=x, sample_rate_hz=rate)


def encode_wav(buf: AudioBuffer, bits: int = 16) -> bytes:
    """Serialize a buffer to a mono WAV container (PCM16 or float32)."""
    if bits == 16:
        fmt_tag, bytes_per = 1, 2
        payload = np.clip(np.round(buf.samples * 32768.0), -32768, 32767).astype("<i2").tobytes()
    elif bits == 32:
        fmt_tag, bytes_per = 3, 4
        payload = buf.samples.astype("<f4").tobytes()
    else:
        raise ValueError("bits must be 16 or 32")
    rate = buf.sample_rate_hz
    fmt = struct.pack("<HHIIHH", fmt_tag, 1, rate, rate * bytes_per, bytes_per, bits * 1)
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        chunks += b"\x00"
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def resample(buf: AudioBuffer, target_hz: int) -> AudioBuffer:
    """Polyphase resampling; identity when rates match."""
    if target_hz <= 0:
        raise ValueError("target_hz must be positive")
    if target_hz == buf.sample_rate_hz:
        return buf
    from math import gcd

    g = gcd(target_hz, buf.sample_rate_hz)
    up, down = target_hz // g, buf.sample_rate_hz // g
    y = resample_poly(buf.samples, up, down)
    y = np.clip(y, -1.0, 1.0)
    return AudioBuffer(samples=y, sample_rate_hz=target_hz)


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, rate: int, fmin: float, fmax: float) -> tuple[np.ndarray, np.ndarray]:
    """Triangular mel filterbank; returns (filters [n_mels x bins], center freqs Hz)."""
    mel_pts = np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_mels + 2)
    hz_pts = _mel_to_hz(mel_pts)
    fft_freqs = np.fft.rfftfreq(n_fft, d=1.0 / rate)
    fb = np.zeros((n_mels, len(fft_freqs)))
    for i in range(n_mels):
        lo, ctr, hi = hz_pts[i], hz_pts[i + 1], hz_pts[i + 2]
        up = (fft_freqs - lo) / max(ctr - lo, 1e-12)
        down = (hi - fft_freqs) / max(hi - ctr, 1e-12)
        fb[i] = np.maximum(0.0, np.minimum(up, down))
    return fb, hz_pts[1:-1]


def log_mel(buf: AudioBuffer, spec: FrameSpec | None = None) -> FeatureMatrix:
    """Log-mel energies: Hann window, power spectrum, mel triangles, dB clamp."""
    spec = spec or FrameSpec()
    rate = buf.sample_rate_hz
    win = int(round(spec.win_s * rate))
    hop = int(round(spec.hop_s * rate))
    frames = n_frames(len(buf.samples), win, hop)
    if frames == 0:
        return FeatureMatrix(values=np.zeros((0, spec.n_mels)), spec=spec)

    idx = np.arange(win)[None, :] + hop * np.arange(frames)[:, None]
    windowed = buf.samples[idx] * np.hanning(win)[None, :]
    power = np.abs(np.fft.rfft(windowed, axis=1)) ** 2
    fmax = spec.fmax_hz if spec.fmax_hz is not None else rate / 2.0
    fb, _ = mel_filterbank(spec.n_mels, win, rate, spec.fmin_hz, fmax)
    energy = power @ fb.T
    values = 10.0 * np.log10(energy + 1e-10)
    values = np.maximum(values, spec.floor_db)
    return FeatureMatrix(values=values, spec=spec)


def slice_buffer(buf: AudioBuffer, iv: TimeInterval) -> AudioBuffer:
    """Sample-accurate cut; end clamped to duration when within one hop."""
    dur = buf.duration_s
    if iv.start_s >= dur:
        raise OutOfRange(f"slice start {iv.start_s} >= duration {dur}")
    end = min(iv.end_s, dur)
    i0 = int(round(iv.start_s * buf.sample_rate_hz))
    i1 = int(round(end * buf.sample_rate_hz))
    return AudioBuffer(samples=buf.samples[i0:i1], sample_rate_hz=buf.sample_rate_hz)
