"""Objective speech expressiveness scoring.

Scores an utterance on three sub-dimensions (emotion intensity, prosodic
richness, spontaneity), each on 0-100, and fuses them into one holistic
expressiveness score with a gradient-boosted tree model trained on human
ratings. Ships a curation pipeline, benchmarking harness, validation
statistics, an annotation service, and a CLI.
"""

from .audio import (
    CANONICAL_RATE,
    AudioClip,
    MalformedHeader,
    Segment,
    TruncatedData,
    UnsupportedEncoding,
    decode_wav,
    encode_wav,
    load_wav,
    resample,
    save_wav,
    segment_by_silence,
)
from .features import (
    FeatureSummary,
    ProsodicFeatures,
    compute_features,
    detect_pauses,
    extract_energy,
    extract_f0,
    summarize,
)
from .fusion import (
    FusionModel,
    PreferenceDataset,
    TrainParams,
    load_model,
    predict,
    save_model,
    train_fusion,
)
from .pipeline import (
    BenchmarkReport,
    ClipScorer,
    CorpusConfig,
    CorpusRoot,
    ManifestEntry,
    benchmark,
    curate,
    rank_systems,
)
from .quality import QualityMetrics, estimate_quality, is_hyper_clean, load_sidecar, mean_quality
from .scorers import (
    ScorerCalibration,
    SpontaneityConfig,
    SubScores,
    load_default_calibration,
    score_emotion_proxy,
    score_prosody_proxy,
    score_spontaneity,
)
from .stats import krippendorff_alpha, paired_t_test, pearson, spearman

__version__ = "0.1.0"
