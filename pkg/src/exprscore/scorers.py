"""The three sub-dimension scorers: spontaneity heuristic + acoustic proxies.

Spontaneity is a conditional map over the mean quality metric: clips that
are suspiciously clean for their assigned naturalness level get squeezed
into a narrow punitive band, everything else scales linearly into the band
around its base level. Emotion and prosody are weighted z-score blends of
the acoustic summary, squashed through a logistic onto 0-100.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from math import exp

from .features import FeatureSummary
from .quality import METRIC_HI, METRIC_LO, QualityMetrics, is_hyper_clean, mean_quality

ALLOWED_BASE_LEVELS = (1, 3, 5, 7, 9)
MAX_BASE_LEVEL = 9

PROVENANCE_NATIVE = "native_proxy"
PROVENANCE_EXTERNAL = "external_scorer"
PROVENANCE_LMM = "lmm_annotator"
PROVENANCE_HEURISTIC = "heuristic"

EMOTION_WEIGHTS = {
    "f0_range_st": 0.35,
    "energy_std_db": 0.25,
    "f0_std_st": 0.20,
    "syllable_rate_proxy": 0.20,
}
PROSODY_WEIGHTS = {
    "f0_turns_per_s": 0.35,
    "f0_range_st": 0.25,
    "pause_cv": 0.20,
    "energy_range_db": 0.20,
}

_PITCH_FEATURES = ("f0_range_st", "f0_std_st", "f0_turns_per_s")
_ABSENT_PITCH_Z = -2.0


class InvalidBaseLevel(ValueError):
    pass


def _default_punitive_ranges() -> dict[int, tuple[float, float]]:
    # width 0.5 per level, ordered so higher levels keep higher (but still
    # punitive) bands: 1 -> [0, 0.5], 3 -> [0.5, 1.0], 5 -> [1.0, 1.5], ...
    return {lvl: (0.25 * (lvl - 1), 0.25 * (lvl - 1) + 0.5) for lvl in (1, 3, 5, 7)}


@dataclass
class SpontaneityConfig:
    base_level: int
    t_q: float = 3.5
    l_max: int = MAX_BASE_LEVEL
    metric_lo: float = METRIC_LO
    metric_hi: float = METRIC_HI
    punitive_ranges: dict[int, tuple[float, float]] = field(
        default_factory=_default_punitive_ranges
    )

    def __post_init__(self):
        if self.base_level not in ALLOWED_BASE_LEVELS:
            raise InvalidBaseLevel(
                f"base_level must be one of {ALLOWED_BASE_LEVELS}, got {self.base_level}"
            )


@dataclass(frozen=True)
class SubScores:
    s_emo: float
    s_pros: float
    s_spon: float
    provenance: dict = field(
        default_factory=lambda: {
            "emotion": PROVENANCE_NATIVE,
            "prosody": PROVENANCE_NATIVE,
            "spontaneity": PROVENANCE_HEURISTIC,
        }
    )

    def __post_init__(self):
        for name in ("s_emo", "s_pros", "s_spon"):
            value = getattr(self, name)
            if not (0.0 <= value <= 100.0):
                raise ValueError(f"{name}={value} outside [0, 100]")

    def as_vector(self) -> list[float]:
        return [self.s_emo, self.s_pros, self.s_spon]


def score_spontaneity(q: QualityMetrics, cfg: SpontaneityConfig) -> float:
    """Conditional spontaneity score on 0-100.

    Hyper-clean clips below the top base level take the punitive branch
    (cleaner means lower); everything else scales the mean metric linearly
    into [base-1, base+1] on the internal 0-10 scale, then presents x10.
    """
    if cfg.base_level not in ALLOWED_BASE_LEVELS:
        raise InvalidBaseLevel(f"base_level {cfg.base_level} not allowed")
    m_avg = mean_quality(q)
    if is_hyper_clean(q, cfg.t_q) and cfg.base_level < cfg.l_max:
        p_lo, p_hi = cfg.punitive_ranges[cfg.base_level]
        s10 = p_lo + (cfg.metric_hi - m_avg) / (cfg.metric_hi - cfg.t_q) * (p_hi - p_lo)
    else:
        lo = cfg.base_level - 1.0
        hi = cfg.base_level + 1.0
        span = cfg.metric_hi - cfg.metric_lo
        s10 = lo + 2.0 * (m_avg - cfg.metric_lo) / span
        s10 = min(hi, max(lo, s10))
    return 10.0 * s10


@dataclass
class ScorerCalibration:
    """Reference feature distribution plus blend weights for the proxies."""

    feature_means: dict[str, float]
    feature_stds: dict[str, float]
    emotion_weights: dict[str, float] = field(default_factory=lambda: dict(EMOTION_WEIGHTS))
    prosody_weights: dict[str, float] = field(default_factory=lambda: dict(PROSODY_WEIGHTS))
    slope: float = 1.0
    format_version: int = 1

    def __post_init__(self):
        for name, std in self.feature_stds.items():
            if std <= 0:
                raise ValueError(f"calibration std for {name} must be positive")
        for weights in (self.emotion_weights, self.prosody_weights):
            total = sum(weights.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"weights must sum to 1, got {total}")
            missing = [f for f in weights if f not in self.feature_means]
            if missing:
                raise ValueError(f"calibration missing feature stats for {missing}")

    def zscore(self, summary: FeatureSummary, feature: str) -> float:
        value = getattr(summary, feature)
        if value is None:
            if feature in _PITCH_FEATURES:
                return _ABSENT_PITCH_Z
            value = 0.0
        return (value - self.feature_means[feature]) / self.feature_stds[feature]

    def to_json(self) -> str:
        payload = {
            "format_version": self.format_version,
            "feature_means": self.feature_means,
            "feature_stds": self.feature_stds,
            "emotion_weights": self.emotion_weights,
            "prosody_weights": self.prosody_weights,
            "slope": self.slope,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScorerCalibration":
        payload = json.loads(text)
        return cls(
            feature_means=payload["feature_means"],
            feature_stds=payload["feature_stds"],
            emotion_weights=payload["emotion_weights"],
            prosody_weights=payload["prosody_weights"],
            slope=payload["slope"],
            format_version=payload.get("format_version", 1),
        )


def load_calibration(path) -> ScorerCalibration:
    with open(path, encoding="utf-8") as fh:
        return ScorerCalibration.from_json(fh.read())


def load_default_calibration() -> ScorerCalibration:
    text = resources.files("exprscore.data").joinpath("calibration.json").read_text("utf-8")
    return ScorerCalibration.from_json(text)


def _logistic_score(raw: float, slope: float) -> float:
    return 100.0 / (1.0 + exp(-slope * raw))


def score_emotion_proxy(summary: FeatureSummary, cal: ScorerCalibration) -> float:
    """Arousal proxy: pitch span, loudness variability, pitch jitter, rate."""
    raw = sum(w * cal.zscore(summary, f) for f, w in cal.emotion_weights.items())
    return _logistic_score(raw, cal.slope)


def score_prosody_proxy(summary: FeatureSummary, cal: ScorerCalibration) -> float:
    """Melodic/rhythmic richness proxy: contour movement, span, pause variety."""
    raw = sum(w * cal.zscore(summary, f) for f, w in cal.prosody_weights.items())
    return _logistic_score(raw, cal.slope)
