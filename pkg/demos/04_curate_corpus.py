"""Run the curation pipeline over a small synthetic corpus.

Builds 16 WAV files of varying liveliness plus a quality sidecar, scores
everything, and selects clips whose fused score clears the 63.5 threshold.
The manifest is line-delimited JSON; the summary lives in a sibling file.
"""

import json
import tempfile
from pathlib import Path

from exprscore import CorpusConfig, CorpusRoot, curate, save_wav
from exprscore.calibration import build_default_fusion_model, synth_voice
from exprscore.fusion import save_model

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    root = tmp / "corpus"
    root.mkdir()

    sidecar_rows = ["id,ovrl,sig,bak,p808"]
    for i in range(16):
        liveliness = i / 15.0
        clip = synth_voice(
            duration_s=2.0,
            vibrato_st=0.3 + 5.0 * liveliness,
            am_depth=0.2 + 0.6 * liveliness,
            seed=i,
        )
        save_wav(clip, root / f"utt{i:02d}.wav")
        m = 1.5 + 1.8 * liveliness  # stays below the hyper-clean threshold
        sidecar_rows.append(f"utt{i:02d},{m:.2f},{m:.2f},{m:.2f},{m:.2f}")
    (tmp / "quality.csv").write_text("\n".join(sidecar_rows) + "\n")

    model_path = tmp / "fusion.json"
    save_model(build_default_fusion_model(), model_path)

    config = CorpusConfig(
        roots=[CorpusRoot(path=str(root), l_base=7, language="en")],
        fusion_model_path=str(model_path),
        manifest_path=str(tmp / "manifest.jsonl"),
        threshold=63.5,
        sidecar_path=str(tmp / "quality.csv"),
    )
    entries, summary = curate(config)

    print(f"{'clip':<8} {'s_emo':>6} {'s_pros':>6} {'s_spon':>6} {'s_expr':>6}  selected")
    for e in entries:
        mark = "yes" if e.selected else "-"
        print(
            f"{e.clip_id:<8} {e.subscores.s_emo:>6.1f} {e.subscores.s_pros:>6.1f} "
            f"{e.subscores.s_spon:>6.1f} {e.s_expr:>6.1f}  {mark}"
        )
    print("\nsummary:", json.dumps(summary, indent=2, sort_keys=True))
    first_line = (tmp / "manifest.jsonl").read_text().splitlines()[0]
    print("\nfirst manifest line:", first_line[:160], "...")
