"""Frame-level acoustic features: F0 track, energy track, voicing, pauses.

Framing is 40 ms windows with a 10 ms hop. F0 uses a normalized
autocorrelation difference function (YIN-style) with an absolute threshold
and parabolic lag refinement. All statistics that feed the expressiveness
scorers are dispersion-based so that global gain changes do not move them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

FRAME_S = 0.040
HOP_S = 0.010
F0_MIN = 50.0
F0_MAX = 600.0
ENERGY_FLOOR_DB = -80.0
YIN_THRESHOLD = 0.15
# pause threshold sits this far below the clip's p95 frame energy
PAUSE_REL_DB = 25.0
_SILENCE_RMS = 1e-4  # == the -80 dB energy floor
_MEDIAN_WIN = 5


@dataclass
class ProsodicFeatures:
    frame_hop_s: float
    f0_hz: np.ndarray
    energy_db: np.ndarray
    voiced: np.ndarray
    pauses: list[tuple[float, float]]  # (start_s, duration_s)
    frame_window_s: float = FRAME_S

    def __post_init__(self):
        if not (len(self.f0_hz) == len(self.energy_db) == len(self.voiced)):
            raise ValueError("f0, energy and voicing tracks must align")


@dataclass
class FeatureSummary:
    """Clip-level aggregates consumed by the proxy scorers.

    Pitch fields are None when the clip has no voiced frames.
    """

    f0_range_st: float | None
    f0_std_st: float | None
    f0_turns_per_s: float | None
    energy_std_db: float
    energy_range_db: float
    pause_cv: float
    voiced_fraction: float
    syllable_rate_proxy: float

    def as_dict(self) -> dict:
        return {
            "f0_range_st": self.f0_range_st,
            "f0_std_st": self.f0_std_st,
            "f0_turns_per_s": self.f0_turns_per_s,
            "energy_std_db": self.energy_std_db,
            "energy_range_db": self.energy_range_db,
            "pause_cv": self.pause_cv,
            "voiced_fraction": self.voiced_fraction,
            "syllable_rate_proxy": self.syllable_rate_proxy,
        }


def _frame(x: np.ndarray, frame: int, hop: int) -> np.ndarray:
    if len(x) < frame:
        return np.empty((0, frame))
    return sliding_window_view(x, frame)[::hop]


def extract_f0(
    clip,
    frame_s: float = FRAME_S,
    hop_s: float = HOP_S,
    fmin: float = F0_MIN,
    fmax: float = F0_MAX,
    threshold: float = YIN_THRESHOLD,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame F0 estimate and voicing decision.

    Returns ``(f0_hz, voiced)``; unvoiced frames carry F0 = 0. A frame is
    voiced when the cumulative-mean-normalized difference function dips
    below ``threshold`` at a lag inside the [fmin, fmax] band.
    """
    sr = clip.sample_rate
    frame = int(round(frame_s * sr))
    hop = max(1, int(round(hop_s * sr)))
    x = np.asarray(clip.samples, dtype=np.float64)
    frames = _frame(x, frame, hop)
    n = len(frames)
    if n == 0:
        return np.zeros(0), np.zeros(0, dtype=bool)

    half = frame // 2
    tau_min = max(2, int(sr / fmax))
    tau_max = min(half, int(math.ceil(sr / fmin)))

    # difference function d(tau) = sum_{j<half} (x[j] - x[j+tau])^2 via FFT
    pad = 1 << (frame - 1).bit_length()
    spec_full = np.fft.rfft(frames, pad, axis=1)
    spec_head = np.fft.rfft(frames[:, :half], pad, axis=1)
    cross = np.fft.irfft(np.conj(spec_head) * spec_full, pad, axis=1)[:, : half + 1]

    sq = frames**2
    csum = np.concatenate([np.zeros((n, 1)), np.cumsum(sq, axis=1)], axis=1)
    taus = np.arange(half + 1)
    energy_head = csum[:, half]
    energy_lag = csum[:, taus + half] - csum[:, taus]
    diff = np.maximum(energy_head[:, None] + energy_lag - 2.0 * cross, 0.0)

    # cumulative mean normalization; all-zero frames normalize to 1
    running = np.cumsum(diff[:, 1:], axis=1)
    safe = np.where(running > 0, running, 1.0)
    dprime = np.where(running > 0, diff[:, 1:] * taus[1:] / safe, 1.0)
    dprime = np.concatenate([np.ones((n, 1)), dprime], axis=1)

    rms = np.sqrt(sq.mean(axis=1))
    f0 = np.zeros(n)
    voiced = np.zeros(n, dtype=bool)

    band = dprime[:, tau_min : tau_max + 1]
    candidates = (band < threshold).any(axis=1) & (rms >= _SILENCE_RMS)
    first = np.argmax(band < threshold, axis=1) + tau_min

    for i in np.nonzero(candidates)[0]:
        row = dprime[i]
        tau = int(first[i])
        while tau + 1 <= tau_max and row[tau + 1] < row[tau]:
            tau += 1
        if 1 <= tau < half:
            a, b, c = row[tau - 1], row[tau], row[tau + 1]
            denom = a - 2.0 * b + c
            delta = 0.5 * (a - c) / denom if denom > 0 else 0.0
            delta = min(0.5, max(-0.5, delta))
        else:
            delta = 0.0
        freq = sr / (tau + delta)
        if fmin <= freq <= fmax:
            f0[i] = freq
            voiced[i] = True
    return f0, voiced


def extract_energy(clip, frame_s: float = FRAME_S, hop_s: float = HOP_S) -> np.ndarray:
    """Per-frame RMS level in dBFS, floored at -80 dB."""
    sr = clip.sample_rate
    frame = int(round(frame_s * sr))
    hop = max(1, int(round(hop_s * sr)))
    frames = _frame(np.asarray(clip.samples, dtype=np.float64), frame, hop)
    if len(frames) == 0:
        return np.zeros(0)
    rms = np.sqrt((frames**2).mean(axis=1))
    return 20.0 * np.log10(np.maximum(rms, _SILENCE_RMS))


def detect_pauses(
    features: ProsodicFeatures, min_pause_s: float = 0.4
) -> list[tuple[float, float]]:
    """Maximal unvoiced low-energy runs lasting at least ``min_pause_s``.

    The energy threshold is relative (p95 frame energy minus 25 dB) so that
    pause structure survives gain changes; frames at the digital-silence
    floor always count as pause.
    """
    energy = features.energy_db
    voiced = features.voiced
    n = len(energy)
    if n == 0:
        return []
    threshold = float(np.percentile(energy, 95)) - PAUSE_REL_DB
    quiet = (energy < threshold) | (energy <= ENERGY_FLOOR_DB + 1e-9)
    mask = quiet & ~voiced

    hop = features.frame_hop_s
    win = features.frame_window_s
    pauses = []
    i = 0
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        duration = (j - i) * hop + win
        if duration >= min_pause_s:
            pauses.append((i * hop, duration))
        i = j + 1
    return pauses


def compute_features(
    clip,
    frame_s: float = FRAME_S,
    hop_s: float = HOP_S,
    min_pause_s: float = 0.4,
) -> ProsodicFeatures:
    f0, voiced = extract_f0(clip, frame_s=frame_s, hop_s=hop_s)
    energy = extract_energy(clip, frame_s=frame_s, hop_s=hop_s)
    feats = ProsodicFeatures(
        frame_hop_s=hop_s,
        f0_hz=f0,
        energy_db=energy,
        voiced=voiced,
        pauses=[],
        frame_window_s=frame_s,
    )
    feats.pauses = detect_pauses(feats, min_pause_s=min_pause_s)
    return feats


def _median_smooth(values: np.ndarray, width: int = _MEDIAN_WIN) -> np.ndarray:
    if len(values) == 0:
        return values
    half = width // 2
    out = np.empty_like(values)
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out[i] = np.median(values[lo:hi])
    return out


def count_direction_changes(contour: np.ndarray, min_step: float = 0.25) -> int:
    """Direction reversals (peaks + valleys) with a dead band.

    A reversal only counts once the contour has moved ``min_step`` away
    from its running extreme, so sub-resolution tracker jitter does not
    register as melodic movement.
    """
    if len(contour) < 2:
        return 0
    turns = 0
    direction = 0
    extreme = contour[0]
    for v in contour[1:]:
        if direction == 0:
            if abs(v - extreme) >= min_step:
                direction = 1 if v > extreme else -1
                extreme = v
        elif direction == 1:
            if v >= extreme:
                extreme = v
            elif extreme - v >= min_step:
                turns += 1
                direction = -1
                extreme = v
        else:
            if v <= extreme:
                extreme = v
            elif v - extreme >= min_step:
                turns += 1
                direction = 1
                extreme = v
    return turns


def summarize(features: ProsodicFeatures) -> FeatureSummary:
    """Aggregate the frame tracks into the scorer-facing feature vector."""
    voiced_mask = features.voiced.astype(bool)
    f0_voiced = features.f0_hz[voiced_mask]
    hop = features.frame_hop_s
    n_frames = len(features.energy_db)

    if len(f0_voiced) > 0:
        p5, p95 = np.percentile(f0_voiced, [5, 95])
        f0_range_st = 12.0 * math.log2(p95 / p5) if p5 > 0 else 0.0
        median = float(np.median(f0_voiced))
        st = 12.0 * np.log2(f0_voiced / median)
        f0_std_st = float(np.std(st))
        smooth = _median_smooth(st)
        voiced_seconds = len(f0_voiced) * hop
        f0_turns_per_s = count_direction_changes(smooth) / voiced_seconds
    else:
        f0_range_st = None
        f0_std_st = None
        f0_turns_per_s = None

    if n_frames > 0:
        energy = features.energy_db
        energy_std_db = float(np.std(energy))
        lo, hi = np.percentile(energy, [5, 95])
        energy_range_db = float(hi - lo)
        voiced_fraction = float(voiced_mask.mean())
        syllable_rate_proxy = _energy_peaks_per_s(energy, hop)
    else:
        energy_std_db = 0.0
        energy_range_db = 0.0
        voiced_fraction = 0.0
        syllable_rate_proxy = 0.0

    durations = np.array([d for _, d in features.pauses])
    if len(durations) >= 2 and durations.mean() > 0:
        pause_cv = float(durations.std() / durations.mean())
    else:
        pause_cv = 0.0

    return FeatureSummary(
        f0_range_st=f0_range_st,
        f0_std_st=f0_std_st,
        f0_turns_per_s=f0_turns_per_s,
        energy_std_db=energy_std_db,
        energy_range_db=energy_range_db,
        pause_cv=pause_cv,
        voiced_fraction=voiced_fraction,
        syllable_rate_proxy=syllable_rate_proxy,
    )


def _energy_peaks_per_s(energy: np.ndarray, hop: float, band_db: float = 3.0) -> float:
    """Prominent energy peaks (rise and fall of at least ``band_db``) per second."""
    n = len(energy)
    if n < 3:
        return 0.0
    peaks = 0
    direction = 0
    extreme = energy[0]
    for v in energy[1:]:
        if direction <= 0:
            if v <= extreme:
                extreme = v
            elif v - extreme >= band_db:
                direction = 1
                extreme = v
        else:
            if v >= extreme:
                extreme = v
            elif extreme - v >= band_db:
                peaks += 1
                direction = -1
                extreme = v
    return peaks / (n * hop)
