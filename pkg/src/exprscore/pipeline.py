"""End-to-end workflows: corpus curation and system benchmarking.

Curation walks configured corpus roots, standardizes every decodable WAV
to 16 kHz mono, scores all three dimensions, fuses them, and writes a
line-delimited JSON manifest plus a summary. Benchmarking scores one clip
set per system, ranks systems by mean fused score, and correlates the
ranking against human scores when available.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import clients
from .audio import CANONICAL_RATE, AudioClip, encode_wav, load_wav, resample
from .features import compute_features, summarize
from .fusion import FusionModel, load_model, predict
from .quality import QualityMetrics, estimate_quality, load_sidecar
from .scorers import (
    ALLOWED_BASE_LEVELS,
    PROVENANCE_EXTERNAL,
    PROVENANCE_HEURISTIC,
    PROVENANCE_LMM,
    PROVENANCE_NATIVE,
    ScorerCalibration,
    SpontaneityConfig,
    SubScores,
    load_default_calibration,
    score_emotion_proxy,
    score_prosody_proxy,
    score_spontaneity,
)
from .stats import rankdata, spearman

MANIFEST_SCHEMA_VERSION = 1
DEFAULT_THRESHOLD = 63.5


class NoFusionModel(RuntimeError):
    pass


class PromptSetMismatch(ValueError):
    pass


class TooFewSystems(ValueError):
    pass


@dataclass
class CorpusRoot:
    path: str
    l_base: int
    language: str = "und"

    def __post_init__(self):
        if self.l_base not in ALLOWED_BASE_LEVELS:
            raise ValueError(f"l_base must be one of {ALLOWED_BASE_LEVELS}")


@dataclass
class CorpusConfig:
    roots: list[CorpusRoot]
    fusion_model_path: str
    manifest_path: str
    threshold: float = DEFAULT_THRESHOLD
    sidecar_path: str | None = None
    calibration_path: str | None = None
    asr_url: str | None = None
    external_scorer_url: str | None = None  # optional replacement for emotion+prosody
    lmm_url: str | None = None  # optional LMM annotator backend for prosody
    lmm_template_path: str | None = None
    threads: int = 1

    def __post_init__(self):
        if not (0.0 <= self.threshold <= 100.0):
            raise ValueError(f"threshold {self.threshold} outside [0, 100]")

    @classmethod
    def from_file(cls, path) -> "CorpusConfig":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        roots = [
            CorpusRoot(
                path=r["path"],
                l_base=int(r["l_base"]),
                language=r.get("language", "und"),
            )
            for r in payload["roots"]
        ]
        return cls(
            roots=roots,
            fusion_model_path=payload["fusion_model"],
            manifest_path=payload["manifest"],
            threshold=float(payload.get("threshold", DEFAULT_THRESHOLD)),
            sidecar_path=payload.get("sidecar"),
            calibration_path=payload.get("calibration"),
            asr_url=payload.get("asr_url"),
            external_scorer_url=payload.get("external_scorer_url"),
            lmm_url=payload.get("lmm_url"),
            lmm_template_path=payload.get("lmm_template"),
            threads=int(payload.get("threads", 1)),
        )


@dataclass
class ManifestEntry:
    clip_id: str
    source_path: str
    duration_s: float
    language: str
    quality: QualityMetrics | None
    subscores: SubScores | None
    s_expr: float | None
    selected: bool
    transcript: str | None = None
    feature_summary: dict | None = None
    error: str | None = None

    def to_json_line(self) -> str:
        payload = {
            "id": self.clip_id,
            "path": self.source_path,
            "duration_s": round(self.duration_s, 6),
            "language": self.language,
            "quality": None
            if self.quality is None
            else {
                "ovrl": self.quality.ovrl,
                "sig": self.quality.sig,
                "bak": self.quality.bak,
                "p808": self.quality.p808,
                "source": self.quality.source,
            },
            "scores": None
            if self.subscores is None
            else {
                "s_emo": self.subscores.s_emo,
                "s_pros": self.subscores.s_pros,
                "s_spon": self.subscores.s_spon,
                "s_expr": self.s_expr,
            },
            "provenance": None if self.subscores is None else self.subscores.provenance,
            "selected": self.selected,
            "transcript": self.transcript,
            "features": self.feature_summary,
            "error": self.error,
        }
        return json.dumps(payload, sort_keys=True)


class ClipScorer:
    """Composes features, quality, sub-scorers and the fusion model."""

    def __init__(
        self,
        fusion_model: FusionModel,
        calibration: ScorerCalibration | None = None,
        spontaneity: SpontaneityConfig | None = None,
        quality_lookup: dict[str, QualityMetrics] | None = None,
        external_scorer=None,
        lmm_annotator=None,
    ):
        self.fusion_model = fusion_model
        self.calibration = calibration or load_default_calibration()
        self.spontaneity = spontaneity or SpontaneityConfig(base_level=5)
        self.quality_lookup = quality_lookup or {}
        self.external_scorer = external_scorer
        self.lmm_annotator = lmm_annotator

    def score_clip(self, clip: AudioClip, clip_id: str, audio_path: str = ""):
        tracks = compute_features(clip)
        summary = summarize(tracks)
        quality = self.quality_lookup.get(clip_id)
        if quality is None:
            quality = estimate_quality(clip, tracks)

        provenance = {
            "emotion": PROVENANCE_NATIVE,
            "prosody": PROVENANCE_NATIVE,
            "spontaneity": PROVENANCE_HEURISTIC,
        }
        if self.external_scorer is not None:
            s_emo = self.external_scorer.score(clip_id, audio_path, "emotion")
            s_pros = self.external_scorer.score(clip_id, audio_path, "prosody")
            provenance["emotion"] = PROVENANCE_EXTERNAL
            provenance["prosody"] = PROVENANCE_EXTERNAL
        else:
            s_emo = score_emotion_proxy(summary, self.calibration)
            s_pros = score_prosody_proxy(summary, self.calibration)
        if self.lmm_annotator is not None:
            s_pros = self.lmm_annotator.score_prosody(clip_id, encode_wav(clip))
            provenance["prosody"] = PROVENANCE_LMM
        s_spon = score_spontaneity(quality, self.spontaneity)

        scores = SubScores(s_emo=s_emo, s_pros=s_pros, s_spon=s_spon, provenance=provenance)
        s_expr = predict(self.fusion_model, scores)
        return scores, s_expr, quality, summary


def _find_wavs(root: Path) -> list[Path]:
    return sorted(p for p in root.rglob("*.wav") if p.is_file())


def curate(config: CorpusConfig, fusion_model: FusionModel | None = None):
    """Run the curation pipeline; returns (entries, summary_dict).

    Per-clip failures are recorded in the manifest and never abort the
    batch. Entries come back ordered by clip id so repeated runs produce
    identical manifests.
    """
    if fusion_model is None:
        try:
            fusion_model = load_model(config.fusion_model_path)
        except OSError as exc:
            raise NoFusionModel(f"fusion model not readable: {exc}") from exc

    calibration = None
    if config.calibration_path:
        from .scorers import load_calibration

        calibration = load_calibration(config.calibration_path)

    quality_lookup: dict[str, QualityMetrics] = {}
    if config.sidecar_path:
        quality_lookup = load_sidecar(config.sidecar_path)

    asr = clients.AsrConfig(url=config.asr_url) if config.asr_url else None
    external = (
        clients.HttpScorer(config.external_scorer_url) if config.external_scorer_url else None
    )
    lmm = None
    if config.lmm_url:
        template = (
            clients.PromptTemplate.from_file(config.lmm_template_path)
            if config.lmm_template_path
            else clients.default_prompt_template()
        )
        lmm = clients.LmmAnnotator(
            clients.LmmAnnotatorConfig(url=config.lmm_url, template=template)
        )

    jobs = []
    for root in config.roots:
        root_path = Path(root.path)
        scorer = ClipScorer(
            fusion_model,
            calibration=calibration,
            spontaneity=SpontaneityConfig(base_level=root.l_base),
            quality_lookup=quality_lookup,
            external_scorer=external,
            lmm_annotator=lmm,
        )
        for wav in _find_wavs(root_path):
            clip_id = wav.relative_to(root_path).with_suffix("").as_posix()
            jobs.append((clip_id, wav, root, scorer))
    jobs.sort(key=lambda item: item[0])

    def process(job):
        clip_id, wav, root, scorer = job
        try:
            clip = load_wav(wav)
        except (OSError, ValueError) as exc:
            return ManifestEntry(
                clip_id=clip_id,
                source_path=str(wav),
                duration_s=0.0,
                language=root.language,
                quality=None,
                subscores=None,
                s_expr=None,
                selected=False,
                error=f"{type(exc).__name__}: {exc}",
            )
        if clip.sample_rate != CANONICAL_RATE:
            clip = resample(clip, CANONICAL_RATE)
        try:
            scores, s_expr, quality, summary = scorer.score_clip(clip, clip_id, str(wav))
        except (
            clients.ScorerUnavailable,
            clients.ProtocolViolation,
            clients.ScoreOutOfRange,
            clients.AnnotatorUnavailable,
            clients.UnparseableResponse,
            clients.RatingOutOfScale,
        ) as exc:
            return ManifestEntry(
                clip_id=clip_id,
                source_path=str(wav),
                duration_s=clip.duration_seconds,
                language=root.language,
                quality=None,
                subscores=None,
                s_expr=None,
                selected=False,
                error=f"{type(exc).__name__}: {exc}",
            )
        transcript = None
        error = None
        if asr is not None:
            try:
                transcript = clients.transcribe_via_asr(clip_id, encode_wav(clip), asr)
            except clients.AsrUnavailable as exc:
                error = f"AsrUnavailable: {exc}"
        return ManifestEntry(
            clip_id=clip_id,
            source_path=str(wav),
            duration_s=clip.duration_seconds,
            language=root.language,
            quality=quality,
            subscores=scores,
            s_expr=s_expr,
            selected=s_expr >= config.threshold,
            transcript=transcript,
            feature_summary=summary.as_dict(),
            error=error,
        )

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            entries = list(pool.map(process, jobs))
    else:
        entries = [process(job) for job in jobs]
    entries.sort(key=lambda e: e.clip_id)

    selected = [e for e in entries if e.selected]
    lang_hours: dict[str, float] = {}
    for e in selected:
        lang_hours[e.language] = lang_hours.get(e.language, 0.0) + e.duration_s / 3600.0
    total_selected_hours = sum(lang_hours.values())
    summary = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "threshold": config.threshold,
        "clip_count": len(entries),
        "error_count": sum(1 for e in entries if e.error and e.subscores is None),
        "selected_count": len(selected),
        "total_hours": round(sum(e.duration_s for e in entries) / 3600.0, 6),
        "selected_hours": round(total_selected_hours, 6),
        "selected_mean_s_expr": (
            round(float(np.mean([e.s_expr for e in selected])), 6) if selected else None
        ),
        "language_ratio": {
            lang: round(hours / total_selected_hours, 6) if total_selected_hours else 0.0
            for lang, hours in sorted(lang_hours.items())
        },
    }

    manifest_path = Path(config.manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(entry.to_json_line() + "\n")
    with open(manifest_path.with_suffix(".summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return entries, summary


@dataclass
class SystemResult:
    name: str
    mean_scores: dict[str, float]
    rank: float
    human_score: float | None = None
    human_rank: float | None = None


@dataclass
class BenchmarkReport:
    systems: list[SystemResult]
    srcc_vs_human: float | None = None
    per_utterance: dict[str, list[dict]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "systems": [
                {
                    "name": s.name,
                    "mean_scores": s.mean_scores,
                    "rank": s.rank,
                    "human_score": s.human_score,
                    "human_rank": s.human_rank,
                }
                for s in self.systems
            ],
            "srcc_vs_human": self.srcc_vs_human,
            "per_utterance": self.per_utterance,
        }


def rank_systems(
    mean_expr: dict[str, float],
    human_scores: dict[str, float] | None = None,
    mean_subscores: dict[str, dict[str, float]] | None = None,
) -> BenchmarkReport:
    """Rank systems by mean fused score (descending, ties share ranks)."""
    if len(mean_expr) < 2:
        raise TooFewSystems("need at least 2 systems to rank")
    names = list(mean_expr.keys())
    expr = np.array([mean_expr[n] for n in names])
    ranks = rankdata(-expr)

    human_ranks = None
    srcc = None
    if human_scores is not None:
        missing = [n for n in names if n not in human_scores]
        if missing:
            raise ValueError(f"human scores missing for: {missing}")
        human = np.array([human_scores[n] for n in names])
        human_ranks = rankdata(-human)
        srcc = spearman(ranks, human_ranks)

    systems = []
    for i, name in enumerate(names):
        scores = {"s_expr": float(expr[i])}
        if mean_subscores and name in mean_subscores:
            scores.update(mean_subscores[name])
        systems.append(
            SystemResult(
                name=name,
                mean_scores=scores,
                rank=float(ranks[i]),
                human_score=None if human_scores is None else float(human_scores[name]),
                human_rank=None if human_ranks is None else float(human_ranks[i]),
            )
        )
    systems.sort(key=lambda s: (s.rank, s.name))
    return BenchmarkReport(systems=systems, srcc_vs_human=srcc)


def benchmark(
    systems: dict[str, list[tuple[str, AudioClip]]],
    scorer: ClipScorer,
    human_scores: dict[str, float] | None = None,
) -> BenchmarkReport:
    """Score every system's clips and rank the systems.

    Every system must answer the same prompt set: clip ids are compared
    across systems and any mismatch aborts.
    """
    if len(systems) < 2:
        raise TooFewSystems("need at least 2 systems to rank")
    prompt_sets = {name: {cid for cid, _ in clip_list} for name, clip_list in systems.items()}
    reference = next(iter(prompt_sets.values()))
    for name, prompts in prompt_sets.items():
        if prompts != reference:
            raise PromptSetMismatch(f"system {name!r} answers a different prompt set")

    mean_expr: dict[str, float] = {}
    mean_subscores: dict[str, dict[str, float]] = {}
    per_utterance: dict[str, list[dict]] = {}
    for name, clip_list in systems.items():
        rows = []
        for clip_id, clip in sorted(clip_list, key=lambda item: item[0]):
            scores, s_expr, _, _ = scorer.score_clip(clip, clip_id)
            rows.append(
                {
                    "id": clip_id,
                    "s_emo": scores.s_emo,
                    "s_pros": scores.s_pros,
                    "s_spon": scores.s_spon,
                    "s_expr": s_expr,
                }
            )
        per_utterance[name] = rows
        mean_expr[name] = float(np.mean([r["s_expr"] for r in rows]))
        mean_subscores[name] = {
            key: float(np.mean([r[key] for r in rows]))
            for key in ("s_emo", "s_pros", "s_spon")
        }

    report = rank_systems(mean_expr, human_scores=human_scores, mean_subscores=mean_subscores)
    report.per_utterance = per_utterance
    return report


def load_human_scores(path) -> dict[str, float]:
    """CSV ``system,score`` -> mapping."""
    import csv

    out: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "system" not in reader.fieldnames or "score" not in reader.fieldnames:
            raise ValueError("human scores CSV needs 'system,score' header")
        for row in reader:
            out[row["system"]] = float(row["score"])
    return out
