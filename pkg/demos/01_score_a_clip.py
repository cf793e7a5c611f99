"""Score two clips end to end and compare their sub-dimension breakdowns.

Synthesizes a flat monotone drone and a lively modulated voice, then runs
both through the full scoring stack: acoustic features -> emotion/prosody
proxies, estimated quality -> spontaneity heuristic, fused by the shipped
default model.
"""

import numpy as np

from exprscore import AudioClip, ClipScorer, compute_features, summarize
from exprscore.calibration import build_default_fusion_model, synth_voice

SR = 16000

# a deliberately boring signal: constant pitch, constant loudness
t = np.arange(3 * SR) / SR
flat = AudioClip(0.5 * np.sin(2 * np.pi * 170 * t), SR, "flat-drone")

# a lively one: vibrato, syllabic amplitude modulation, pauses
lively = synth_voice(duration_s=3.0, vibrato_st=5.0, am_depth=0.8, seed=11)

scorer = ClipScorer(build_default_fusion_model())

print(f"{'clip':<12} {'s_emo':>7} {'s_pros':>7} {'s_spon':>7} {'s_expr':>7}")
for name, clip in (("flat", flat), ("lively", lively)):
    scores, s_expr, quality, _ = scorer.score_clip(clip, name)
    print(
        f"{name:<12} {scores.s_emo:>7.1f} {scores.s_pros:>7.1f} "
        f"{scores.s_spon:>7.1f} {s_expr:>7.1f}"
    )

print("\nWhat drove the difference (feature summaries):")
for name, clip in (("flat", flat), ("lively", lively)):
    summary = summarize(compute_features(clip))
    print(
        f"  {name}: pitch span {summary.f0_range_st or 0:.1f} st, "
        f"{summary.f0_turns_per_s or 0:.1f} contour turns/s, "
        f"loudness std {summary.energy_std_db:.1f} dB, "
        f"{summary.syllable_rate_proxy:.1f} energy peaks/s"
    )
