"""WAV decode/encode, band-limited resampling, and silence-based segmentation.

Everything downstream works on :class:`AudioClip`: immutable mono float64
samples in [-1, 1] plus a sample rate. The pipeline rate is 16 kHz.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

CANONICAL_RATE = 16000

# PCM16 normalization divisor; -32768 maps to -1.0 exactly.
PCM16_SCALE = 32768.0

_SINC_HALF_WIDTH = 32  # taps per side for the windowed-sinc resampler
_KAISER_BETA = 8.6


class MalformedHeader(ValueError):
    """RIFF/WAVE container structure is broken (bad magic, sizes, chunks)."""


class UnsupportedEncoding(ValueError):
    """Codec other than PCM16 / IEEE float32, or more than 2 channels."""


class TruncatedData(ValueError):
    """Data chunk is shorter than its declared size."""


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Decoded mono audio: samples in [-1, 1] at a positive sample rate."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or len(samples) == 0:
            raise ValueError("clip must contain at least one mono sample")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        peak = float(np.max(np.abs(samples)))
        if peak > 1.0 + 1e-9:
            raise ValueError(f"samples exceed [-1, 1] (peak {peak:.6f})")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class Segment:
    """A time slice of a parent clip, produced by silence segmentation."""

    start_s: float
    end_s: float
    clip: AudioClip = field(repr=False)

    def __post_init__(self):
        if not (0.0 <= self.start_s < self.end_s):
            raise ValueError(f"bad segment bounds [{self.start_s}, {self.end_s}]")


def decode_wav(data: bytes, source_id: str = "") -> AudioClip:
    """Decode a RIFF/WAVE byte buffer into a mono clip.

    Accepts PCM 16-bit (format 1) and IEEE float 32-bit (format 3), 1 or 2
    channels. Stereo is averaged to mono; PCM16 is scaled by 1/32768.
    """
    if len(data) < 12:
        raise MalformedHeader("buffer too short for a RIFF header")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader("missing RIFF/WAVE magic")

    fmt = None
    raw = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = pos + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body + 16 > len(data):
                raise MalformedHeader("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", data, body)
        elif chunk_id == b"data":
            if fmt is None:
                raise MalformedHeader("data chunk appears before fmt chunk")
            available = len(data) - body
            if available < chunk_size:
                raise TruncatedData(
                    f"data chunk declares {chunk_size} bytes, {available} present"
                )
            raw = data[body : body + chunk_size]
            break
        # chunks are word-aligned
        pos = body + chunk_size + (chunk_size & 1)

    if fmt is None:
        raise MalformedHeader("no fmt chunk found")
    if raw is None:
        raise MalformedHeader("no data chunk found")

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if sample_rate <= 0:
        raise MalformedHeader(f"non-positive sample rate {sample_rate}")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels not supported")
    if audio_format == 1 and bits == 16:
        bytes_per_sample = 2
    elif audio_format == 3 and bits == 32:
        bytes_per_sample = 4
    else:
        raise UnsupportedEncoding(
            f"audio format {audio_format} with {bits}-bit samples not supported"
        )

    frame_bytes = bytes_per_sample * channels
    if len(raw) == 0:
        raise MalformedHeader("empty data chunk")
    if len(raw) % frame_bytes != 0:
        raise TruncatedData("data chunk ends mid-frame")

    if bytes_per_sample == 2:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / PCM16_SCALE
    else:
        samples = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        samples = np.clip(samples, -1.0, 1.0)
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioClip(samples, sample_rate, source_id)


def encode_wav(clip: AudioClip) -> bytes:
    """Serialize a clip as PCM16 WAV with a standard 44-byte header."""
    q = np.clip(np.round(clip.samples * PCM16_SCALE), -32768, 32767).astype("<i2")
    raw = q.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(raw),
        b"WAVE",
        b"fmt ",
        16,
        1,  # PCM
        1,  # mono
        clip.sample_rate,
        clip.sample_rate * 2,
        2,
        16,
        b"data",
        len(raw),
    )
    return header + raw


def load_wav(path) -> AudioClip:
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_wav(data, source_id=str(path))


def save_wav(clip: AudioClip, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wav(clip))


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Resample with a 64-tap Kaiser-windowed sinc interpolator.

    Identity when the rate already matches. Output length is
    round(n * target / source), preserving duration to within one
    output sample period.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    sr = clip.sample_rate
    if target_rate == sr:
        return clip

    x = clip.samples
    n_in = len(x)
    n_out = max(1, int(round(n_in * target_rate / sr)))
    cutoff = min(1.0, target_rate / sr)  # relative to the input Nyquist
    half = _SINC_HALF_WIDTH

    padded = np.concatenate([np.zeros(half), x, np.zeros(half + 1)])
    taps = np.arange(-half + 1, half + 1)
    i0_beta = np.i0(_KAISER_BETA)
    out = np.empty(n_out)

    step = sr / target_rate
    for start in range(0, n_out, 32768):
        idx = np.arange(start, min(start + 32768, n_out))
        pos = idx * step
        k0 = np.floor(pos).astype(np.int64)
        j = k0[:, None] + taps[None, :]
        u = pos[:, None] - j
        window = np.i0(_KAISER_BETA * np.sqrt(np.maximum(0.0, 1.0 - (u / half) ** 2)))
        kernel = cutoff * np.sinc(cutoff * u) * (window / i0_beta)
        seg = padded[j + half]
        out[idx] = (seg * kernel).sum(axis=1) / kernel.sum(axis=1)

    return AudioClip(np.clip(out, -1.0, 1.0), int(target_rate), clip.source_id)


def segment_by_silence(
    clip: AudioClip,
    min_utterance_s: float = 1.0,
    min_pause_s: float = 0.4,
) -> list[Segment]:
    """Split a clip at pauses of at least ``min_pause_s``.

    Returns ordered non-overlapping segments, each at least
    ``min_utterance_s`` long. Fully silent input yields no segments; a clip
    with no internal pause yields one segment spanning it.
    """
    from . import features

    tracks = features.compute_features(clip, min_pause_s=min_pause_s)
    duration = clip.duration_seconds

    # candidate speech regions = gaps between detected pauses
    bounds = [0.0]
    for start, pause_dur in tracks.pauses:
        bounds.append(start)
        bounds.append(min(start + pause_dur, duration))
    bounds.append(duration)

    segments = []
    sr = clip.sample_rate
    for lo, hi in zip(bounds[0::2], bounds[1::2]):
        if hi - lo < min_utterance_s:
            continue
        i0 = int(round(lo * sr))
        i1 = int(round(hi * sr))
        if i1 <= i0:
            continue
        piece = AudioClip(
            clip.samples[i0:i1],
            sr,
            f"{clip.source_id}[{lo:.3f}-{hi:.3f}]" if clip.source_id else f"[{lo:.3f}-{hi:.3f}]",
        )
        segments.append(Segment(start_s=lo, end_s=hi, clip=piece))
    return segments
