import struct

import numpy as np
import pytest

from exprscore.audio import (
    AudioClip,
    MalformedHeader,
    TruncatedData,
    UnsupportedEncoding,
    decode_wav,
    encode_wav,
    resample,
    segment_by_silence,
)

from conftest import SR, silence, tone, tone_gap_tone


def pcm16_wav(samples_i16, sample_rate=16000, channels=1, audio_format=1, bits=16):
    raw = struct.pack(f"<{len(samples_i16)}h", *samples_i16)
    block = channels * bits // 8
    return (
        struct.pack(
            "<4sI4s4sIHHIIHH4sI",
            b"RIFF",
            36 + len(raw),
            b"WAVE",
            b"fmt ",
            16,
            audio_format,
            channels,
            sample_rate,
            sample_rate * block,
            block,
            bits,
            b"data",
            len(raw),
        )
        + raw
    )


class TestDecode:
    def test_identity_mono_pcm16(self):
        clip = decode_wav(pcm16_wav([0] * 16000))
        assert clip.sample_rate == 16000
        assert clip.duration_seconds == pytest.approx(1.0)

    def test_stereo_averages_to_mono(self):
        # L = +0.5, R = -0.5 cancels exactly
        l = int(0.5 * 32768)
        interleaved = [l, -l] * 100
        clip = decode_wav(pcm16_wav(interleaved, channels=2))
        assert np.all(clip.samples == 0.0)

    def test_pcm16_positive_full_scale(self):
        clip = decode_wav(pcm16_wav([32767] * 10))
        # divisor 32768: 32767/32768 = 0.999969...
        assert clip.samples[0] == pytest.approx(32767 / 32768)
        assert abs(clip.samples[0] - 1.0) < 1e-4

    def test_pcm16_negative_full_scale_is_exactly_minus_one(self):
        clip = decode_wav(pcm16_wav([-32768] * 10))
        assert clip.samples[0] == -1.0

    def test_float32_wav(self):
        samples = np.array([0.25, -0.25, 0.5], dtype="<f4")
        raw = samples.tobytes()
        data = (
            struct.pack(
                "<4sI4s4sIHHIIHH4sI",
                b"RIFF", 36 + len(raw), b"WAVE", b"fmt ", 16,
                3, 1, 16000, 64000, 4, 32, b"data", len(raw),
            )
            + raw
        )
        clip = decode_wav(data)
        assert clip.samples == pytest.approx([0.25, -0.25, 0.5])

    def test_bad_magic(self):
        with pytest.raises(MalformedHeader):
            decode_wav(b"RIFX" + b"\x00" * 40)

    def test_unsupported_codec(self):
        with pytest.raises(UnsupportedEncoding):
            decode_wav(pcm16_wav([0] * 4, audio_format=7))

    def test_unsupported_bit_depth(self):
        with pytest.raises(UnsupportedEncoding):
            decode_wav(pcm16_wav([0] * 4, bits=24))

    def test_truncated_data_chunk(self):
        data = pcm16_wav([0] * 100)
        with pytest.raises(TruncatedData):
            decode_wav(data[:-50])

    def test_roundtrip_bit_exact(self):
        rng = np.random.default_rng(5)
        original = pcm16_wav(list(rng.integers(-32768, 32768, size=500)))
        clip = decode_wav(original)
        again = decode_wav(encode_wav(clip))
        assert np.array_equal(clip.samples, again.samples)
        assert clip.sample_rate == again.sample_rate


class TestClipInvariants:
    def test_rejects_out_of_range_samples(self):
        with pytest.raises(ValueError):
            AudioClip(np.array([1.5]), 16000)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            AudioClip(np.zeros(0), 16000)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            AudioClip(np.zeros(10), 0)

    def test_samples_immutable(self):
        clip = tone()
        with pytest.raises(ValueError):
            clip.samples[0] = 0.0


def spectral_peak_hz(clip):
    spectrum = np.abs(np.fft.rfft(clip.samples * np.hanning(len(clip.samples))))
    freqs = np.fft.rfftfreq(len(clip.samples), 1.0 / clip.sample_rate)
    return freqs[int(np.argmax(spectrum))]


class TestResample:
    def test_identity(self):
        clip = tone()
        assert resample(clip, SR) is clip

    def test_length_arithmetic(self):
        clip = tone(duration=1.0, sr=48000)
        out = resample(clip, 16000)
        assert len(out.samples) == 16000
        assert out.sample_rate == 16000

    def test_spectral_peak_preserved(self):
        clip = tone(freq=440.0, duration=1.0, sr=48000)
        out = resample(clip, 16000)
        assert spectral_peak_hz(out) == pytest.approx(440.0, abs=2.0)

    def test_round_trip_tone(self):
        clip = tone(freq=300.0, duration=1.0, sr=16000)
        back = resample(resample(clip, 24000), 16000)
        assert spectral_peak_hz(back) == pytest.approx(300.0, abs=2.0)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            resample(tone(), -1)


class TestSegmentation:
    def test_two_utterances(self):
        clip = AudioClip(
            np.concatenate(
                [tone(duration=1.0).samples, np.zeros(SR), tone(duration=1.0).samples]
            ),
            SR,
            "two",
        )
        segments = segment_by_silence(clip, min_utterance_s=0.5, min_pause_s=0.5)
        assert len(segments) == 2
        assert segments[0].start_s == pytest.approx(0.0, abs=0.05)
        assert segments[0].end_s == pytest.approx(1.0, abs=0.05)
        assert segments[1].start_s == pytest.approx(2.0, abs=0.05)

    def test_silence_yields_nothing(self):
        assert segment_by_silence(silence(3.0)) == []

    def test_continuous_tone_spans_clip(self):
        clip = tone(duration=3.0)
        segments = segment_by_silence(clip)
        assert len(segments) == 1
        assert segments[0].start_s == 0.0
        assert segments[0].end_s == pytest.approx(3.0, abs=0.05)

    def test_segments_ordered_disjoint_within_clip(self):
        clip = tone_gap_tone(gap_s=0.8, tone_s=1.5)
        segments = segment_by_silence(clip, min_utterance_s=1.0, min_pause_s=0.4)
        previous_end = 0.0
        for seg in segments:
            assert seg.start_s >= previous_end
            assert seg.end_s <= clip.duration_seconds + 1e-9
            previous_end = seg.end_s

    def test_segment_clip_duration_matches_bounds(self):
        clip = tone_gap_tone()
        for seg in segment_by_silence(clip, min_utterance_s=0.5):
            expected = seg.end_s - seg.start_s
            assert seg.clip.duration_seconds == pytest.approx(expected, abs=1.0 / SR)
