"""Builds the default scorer calibration and default fusion model.

The shipped calibration profile is derived from a deterministic synthetic
reference set: speech-like signals spanning flat monotone through heavily
modulated delivery, with pauses, vibrato, syllabic amplitude modulation
and a noise bed. Regenerate with ``python demos/07_build_default_profiles.py``.
"""

from __future__ import annotations

import numpy as np

from .audio import CANONICAL_RATE, AudioClip
from .features import FeatureSummary, compute_features, summarize
from .fusion import FusionModel, PreferenceDataset, TrainParams, train_fusion
from .scorers import EMOTION_WEIGHTS, PROSODY_WEIGHTS, ScorerCalibration

_FEATURES = (
    "f0_range_st",
    "f0_std_st",
    "f0_turns_per_s",
    "energy_std_db",
    "energy_range_db",
    "pause_cv",
    "voiced_fraction",
    "syllable_rate_proxy",
)


def synth_voice(
    duration_s: float = 4.0,
    f0_base: float = 180.0,
    vibrato_st: float = 3.0,
    vibrato_hz: float = 4.0,
    am_hz: float = 4.0,
    am_depth: float = 0.6,
    pause_pattern: tuple[float, ...] = (1.2, 0.5, 1.0, 0.7),
    amplitude: float = 0.5,
    noise_db: float = -45.0,
    seed: int = 0,
    sample_rate: int = CANONICAL_RATE,
) -> AudioClip:
    """Deterministic speech-like test signal.

    A frequency-modulated carrier with syllable-rate amplitude modulation,
    interleaved speech/pause spans per ``pause_pattern`` (speech, pause,
    speech, ...), plus low-level white noise.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate

    f0 = f0_base * 2.0 ** ((vibrato_st / 12.0) * np.sin(2 * np.pi * vibrato_hz * t))
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    carrier = np.sin(phase) + 0.4 * np.sin(2 * phase) + 0.2 * np.sin(3 * phase)
    carrier /= np.max(np.abs(carrier))

    am = 1.0 - am_depth * 0.5 * (1 + np.cos(2 * np.pi * am_hz * t))
    voice = carrier * am

    gate = np.ones(n)
    pos = 0.0
    speaking = True
    for span in pause_pattern:
        i0 = int(round(pos * sample_rate))
        i1 = min(n, int(round((pos + span) * sample_rate)))
        if not speaking:
            gate[i0:i1] = 0.0
        pos += span
        speaking = not speaking
        if pos >= duration_s:
            break

    noise = rng.standard_normal(n) * 10 ** (noise_db / 20.0)
    samples = np.clip(amplitude * voice * gate + noise, -1.0, 1.0)
    return AudioClip(samples, sample_rate, source_id=f"synth-{seed}")


def reference_summaries(seed: int = 2024, count: int = 40) -> list[FeatureSummary]:
    """Feature summaries over the documented synthetic reference set."""
    rng = np.random.default_rng(seed)
    summaries = []
    for i in range(count):
        expressiveness = i / (count - 1)  # 0 = flat monotone, 1 = very lively
        clip = synth_voice(
            duration_s=float(rng.uniform(3.0, 5.0)),
            f0_base=float(rng.uniform(110.0, 280.0)),
            vibrato_st=0.2 + 5.5 * expressiveness,
            vibrato_hz=float(rng.uniform(2.0, 6.0)),
            am_hz=float(rng.uniform(2.0, 6.0)),
            am_depth=0.15 + 0.7 * expressiveness,
            pause_pattern=tuple(float(rng.uniform(0.4, 1.4)) for _ in range(5)),
            amplitude=float(rng.uniform(0.25, 0.8)),
            noise_db=float(rng.uniform(-55.0, -35.0)),
            seed=int(rng.integers(0, 2**31)),
        )
        summaries.append(summarize(compute_features(clip)))
    return summaries


def build_calibration(summaries: list[FeatureSummary], slope: float = 1.0) -> ScorerCalibration:
    """Per-feature reference mean/std from a set of summaries."""
    means: dict[str, float] = {}
    stds: dict[str, float] = {}
    for name in _FEATURES:
        values = np.array(
            [getattr(s, name) for s in summaries if getattr(s, name) is not None],
            dtype=np.float64,
        )
        if len(values) == 0:
            raise ValueError(f"reference set produced no values for {name}")
        means[name] = float(values.mean())
        stds[name] = max(float(values.std()), 1e-6)
    return ScorerCalibration(
        feature_means=means,
        feature_stds=stds,
        emotion_weights=dict(EMOTION_WEIGHTS),
        prosody_weights=dict(PROSODY_WEIGHTS),
        slope=slope,
    )


def build_default_calibration(seed: int = 2024) -> ScorerCalibration:
    return build_calibration(reference_summaries(seed=seed))


def build_default_fusion_model(seed: int = 7, rows: int = 600) -> FusionModel:
    """Synthetic default fusion model: a smooth monotone blend of the three
    sub-scores. A stand-in until a model is trained on real annotations."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 100.0, size=(rows, 3))
    target = 0.35 * x[:, 0] + 0.3 * x[:, 1] + 0.35 * x[:, 2]
    target += 8.0 * np.tanh((x[:, 2] - 50.0) / 25.0)  # spontaneity matters most near the middle
    target = np.clip(target, 0.0, 100.0)
    data = PreferenceDataset(x, target, provenance="synthetic-default")
    return train_fusion(data, TrainParams(rounds=150, seed=seed))
