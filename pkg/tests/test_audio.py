import struct

import numpy as np
import pytest

from speakerkit.audio import (
    AudioBuffer,
    FrameSpec,
    TimeInterval,
    decode_wav,
    encode_wav,
    log_mel,
    mel_filterbank,
    n_frames,
    resample,
    slice_buffer,
)
from speakerkit.errors import MalformedContainer, OutOfRange, UnsupportedEncoding

from helpers import tone_buffer


def make_wav(samples, rate=16000, channels=1, bits=16):
    if bits == 16:
        fmt_tag, bp = 1, 2
        payload = np.asarray(samples).astype("<i2").tobytes()
    else:
        fmt_tag, bp = 3, 4
        payload = np.asarray(samples).astype("<f4").tobytes()
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * bp * channels, bp * channels, bits)
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


class TestDecodeWav:
    def test_mono_16bit_duration(self):
        buf = decode_wav(make_wav(np.zeros(16000, dtype=np.int16)))
        assert buf.duration_s == pytest.approx(1.0)
        assert buf.sample_rate_hz == 16000

    def test_stereo_downmix_average(self):
        interleaved = np.empty(2000, dtype=np.int16)
        interleaved[0::2] = 16384   # L = 0.5
        interleaved[1::2] = -16384  # R = -0.5
        buf = decode_wav(make_wav(interleaved, channels=2))
        assert np.all(buf.samples == 0.0)

    def test_bad_magic(self):
        data = b"RIFX" + make_wav(np.zeros(100, dtype=np.int16))[4:]
        with pytest.raises(MalformedContainer):
            decode_wav(data)

    def test_truncated(self):
        with pytest.raises(MalformedContainer):
            decode_wav(b"RIFF\x00\x00")

    def test_compressed_codec_rejected(self):
        fmt = struct.pack("<HHIIHH", 6, 1, 8000, 8000, 1, 8)  # A-law
        body = b"fmt " + struct.pack("<I", len(fmt)) + fmt
        body += b"data" + struct.pack("<I", 4) + b"\x00" * 4
        data = b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body
        with pytest.raises(UnsupportedEncoding):
            decode_wav(data)

    def test_float32_decode(self):
        x = np.linspace(-0.9, 0.9, 1000, dtype=np.float32)
        buf = decode_wav(make_wav(x, bits=32))
        assert np.allclose(buf.samples, x, atol=1e-7)

    def test_scaling_16bit(self):
        buf = decode_wav(make_wav(np.array([16384, -32768], dtype=np.int16)))
        assert buf.samples[0] == pytest.approx(0.5)
        assert buf.samples[1] == pytest.approx(-1.0)

    def test_roundtrip_16bit_exact(self):
        rng = np.random.default_rng(7)
        ints = rng.integers(-32768, 32768, size=5000)
        buf = AudioBuffer(samples=ints / 32768.0, sample_rate_hz=16000)
        back = decode_wav(encode_wav(buf, bits=16))
        assert np.array_equal(back.samples, buf.samples)


class TestResample:
    def test_identity_same_rate(self):
        buf = tone_buffer(440, 0.5)
        out = resample(buf, 16000)
        assert out is buf

    def test_upsample_length(self):
        buf = AudioBuffer(samples=np.zeros(8000), sample_rate_hz=8000)
        out = resample(buf, 16000)
        assert len(out.samples) == 16000
        assert abs(out.duration_s - buf.duration_s) <= 1.0 / 8000

    def test_tone_survives_downsample(self):
        buf = tone_buffer(440, 1.0, rate=48000)
        out = resample(buf, 16000)
        spectrum = np.abs(np.fft.rfft(out.samples))
        freqs = np.fft.rfftfreq(len(out.samples), d=1.0 / 16000)
        assert abs(freqs[np.argmax(spectrum)] - 440.0) < freqs[1]

    def test_down_up_correlation(self):
        # band-limited below r/4: sum of tones
        rate = 16000
        t = np.arange(rate) / rate
        x = 0.3 * np.sin(2 * np.pi * 500 * t) + 0.2 * np.sin(2 * np.pi * 1700 * t)
        buf = AudioBuffer(samples=x, sample_rate_hz=rate)
        back = resample(resample(buf, 2 * rate), rate)
        n = min(len(back.samples), len(x))
        corr = np.corrcoef(back.samples[:n], x[:n])[0, 1]
        assert corr > 0.99


class TestLogMel:
    def test_frame_count_one_second(self):
        fm = log_mel(tone_buffer(440, 1.0))
        assert fm.frames == 98
        assert fm.bins == 24

    def test_all_zero_is_floor(self):
        buf = AudioBuffer(samples=np.zeros(16000), sample_rate_hz=16000)
        fm = log_mel(buf)
        assert np.all(fm.values == -80.0)

    def test_short_input_zero_frames(self):
        buf = AudioBuffer(samples=np.zeros(100), sample_rate_hz=16000)
        assert log_mel(buf).frames == 0

    def test_tone_argmax_stable_and_correct(self):
        fm = log_mel(tone_buffer(1000, 1.0))
        argmax = np.argmax(fm.values, axis=1)
        assert len(set(argmax.tolist())) == 1
        # the winning triangle's support must contain 1 kHz
        fb, centers = mel_filterbank(24, 400, 16000, 0.0, 8000.0)
        k = argmax[0]
        lo = centers[k - 1] if k > 0 else 0.0
        hi = centers[k + 1] if k < 23 else 8000.0
        assert lo < 1000.0 < hi

    @pytest.mark.parametrize("n", range(0, 2001, 37))
    def test_frame_count_formula_sweep(self, n):
        buf = AudioBuffer(samples=np.zeros(n), sample_rate_hz=16000)
        assert log_mel(buf).frames == n_frames(n, 400, 160)

    def test_values_never_below_floor(self):
        fm = log_mel(tone_buffer(440, 0.5, amp=0.01))
        assert np.all(fm.values >= -80.0)


class TestSlice:
    def test_identity(self):
        buf = tone_buffer(440, 1.0)
        out = slice_buffer(buf, TimeInterval(0.0, buf.duration_s))
        assert np.array_equal(out.samples, buf.samples)

    def test_middle_cut(self):
        buf = tone_buffer(440, 1.0)
        out = slice_buffer(buf, TimeInterval(0.25, 0.75))
        assert len(out.samples) == 8000

    def test_out_of_range(self):
        buf = tone_buffer(440, 1.0)
        with pytest.raises(OutOfRange):
            slice_buffer(buf, TimeInterval(2.0, 3.0))


class TestTypes:
    def test_interval_rejects_empty(self):
        with pytest.raises(ValueError):
            TimeInterval(1.0, 1.0)
        with pytest.raises(ValueError):
            TimeInterval(-0.5, 1.0)

    def test_frame_spec_validation(self):
        with pytest.raises(ValueError):
            FrameSpec(win_s=0.01, hop_s=0.02)
        with pytest.raises(ValueError):
            FrameSpec(n_mels=0)
