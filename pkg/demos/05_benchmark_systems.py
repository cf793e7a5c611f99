"""Benchmark synthetic "systems" against a human ranking.

Three fake dialogue systems answer the same four prompts with different
levels of vocal liveliness. The harness scores every response, ranks the
systems by mean fused score, and reports rank correlation against the
human scores.
"""

from exprscore import ClipScorer, SpontaneityConfig, benchmark
from exprscore.calibration import build_default_fusion_model, synth_voice

prompts = [f"prompt{i}" for i in range(4)]

def system_clips(vibrato_st, am_depth, seed0):
    return [
        (p, synth_voice(duration_s=2.0, vibrato_st=vibrato_st, am_depth=am_depth, seed=seed0 + i))
        for i, p in enumerate(prompts)
    ]

systems = {
    "monotone-bot": system_clips(0.3, 0.15, 100),
    "newsreader": system_clips(2.0, 0.45, 200),
    "storyteller": system_clips(5.5, 0.85, 300),
}
human_scores = {"monotone-bot": 1.2, "newsreader": 3.1, "storyteller": 4.6}

scorer = ClipScorer(build_default_fusion_model(), spontaneity=SpontaneityConfig(9))
report = benchmark(systems, scorer, human_scores=human_scores)

print(f"{'system':<14} {'s_emo':>6} {'s_pros':>6} {'s_spon':>6} {'s_expr':>7} {'rank':>5} {'human':>6}")
for s in report.systems:
    print(
        f"{s.name:<14} {s.mean_scores['s_emo']:>6.1f} {s.mean_scores['s_pros']:>6.1f} "
        f"{s.mean_scores['s_spon']:>6.1f} {s.mean_scores['s_expr']:>7.1f} "
        f"{s.rank:>5g} {s.human_score:>6.1f}"
    )
print(f"\nSRCC between automated and human rankings: {report.srcc_vs_human:.3f}")
