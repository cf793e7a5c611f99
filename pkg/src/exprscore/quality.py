"""Speech-quality metrics: sidecar ingestion and a crude built-in estimator.

Quality arrives either from a sidecar CSV produced by an external
non-intrusive MOS predictor, or from :func:`estimate_quality`, a
signal-derived stand-in. Each metric lives on the conventional [1, 5] MOS
scale; the spontaneity heuristic consumes their mean and a hyper-clean flag.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import features as _features

METRIC_LO = 1.0
METRIC_HI = 5.0
HYPER_CLEAN_THRESHOLD = 3.5

SOURCE_SIDECAR = "sidecar"
SOURCE_ESTIMATED = "estimated"

_SIDECAR_COLUMNS = ("id", "ovrl", "sig", "bak", "p808")


class SidecarError(ValueError):
    pass


class MissingColumn(SidecarError):
    pass


class OutOfRange(SidecarError):
    pass


class DuplicateId(SidecarError):
    pass


@dataclass(frozen=True)
class QualityMetrics:
    ovrl: float
    sig: float
    bak: float
    p808: float
    source: str = SOURCE_ESTIMATED

    def __post_init__(self):
        for name in ("ovrl", "sig", "bak", "p808"):
            value = getattr(self, name)
            if not (METRIC_LO <= value <= METRIC_HI):
                raise OutOfRange(f"{name}={value} outside [{METRIC_LO}, {METRIC_HI}]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.ovrl, self.sig, self.bak, self.p808)


def mean_quality(q: QualityMetrics) -> float:
    """Arithmetic mean of the four quality metrics."""
    return (q.ovrl + q.sig + q.bak + q.p808) / 4.0


def is_hyper_clean(q: QualityMetrics, t_q: float = HYPER_CLEAN_THRESHOLD) -> bool:
    """True when every metric strictly exceeds the threshold."""
    return all(value > t_q for value in q.as_tuple())


def load_sidecar(path) -> dict[str, QualityMetrics]:
    """Read a quality sidecar CSV (header: id,ovrl,sig,bak,p808).

    Values outside [1, 5] are rejected rather than clamped so upstream
    scoring problems surface instead of silently skewing spontaneity.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _SIDECAR_COLUMNS if c not in header]
        if missing:
            raise MissingColumn(f"sidecar missing column(s): {', '.join(missing)}")
        out: dict[str, QualityMetrics] = {}
        for row in reader:
            clip_id = row["id"]
            if clip_id in out:
                raise DuplicateId(f"duplicate sidecar id {clip_id!r}")
            try:
                values = {c: float(row[c]) for c in _SIDECAR_COLUMNS[1:]}
            except (TypeError, ValueError) as exc:
                raise SidecarError(f"bad numeric value for id {clip_id!r}") from exc
            out[clip_id] = QualityMetrics(source=SOURCE_SIDECAR, **values)
    return out


def _clamp(value: float) -> float:
    return min(METRIC_HI, max(METRIC_LO, value))


def estimate_quality(clip, tracks: _features.ProsodicFeatures | None = None) -> QualityMetrics:
    """Crude signal-derived quality estimate for clips without a sidecar.

    BAK maps an SNR proxy (p95 minus p10 frame energy) from [0, 40] dB onto
    [1, 5]; SIG rewards voicing and penalizes clipping; OVRL and P.808 are
    their mean. Deliberately labeled so downstream consumers can tell it
    apart from real metric runs.
    """
    if tracks is None:
        tracks = _features.compute_features(clip)
    energy = tracks.energy_db
    if len(energy) == 0:
        return QualityMetrics(1.0, 1.0, 1.0, 1.0, source=SOURCE_ESTIMATED)

    p10, p95 = np.percentile(energy, [10, 95])
    snr_proxy = float(p95 - p10)
    bak = _clamp(1.0 + 4.0 * snr_proxy / 40.0)

    samples = np.asarray(clip.samples)
    clipping_fraction = float(np.mean(np.abs(samples) >= 0.999))
    voiced_fraction = float(np.asarray(tracks.voiced, dtype=bool).mean())
    sig = _clamp(1.0 + 4.0 * voiced_fraction - 8.0 * clipping_fraction)

    ovrl = _clamp((sig + bak) / 2.0)
    return QualityMetrics(ovrl=ovrl, sig=sig, bak=bak, p808=ovrl, source=SOURCE_ESTIMATED)
