"""Regenerate the shipped default calibration and default fusion model.

Both files are deterministic functions of fixed seeds, so re-running this
script reproduces src/exprscore/data/ byte for byte. The calibration's
reference set is the documented synthetic family in
exprscore.calibration.reference_summaries; the default fusion model is a
stand-in trained on a smooth synthetic blend - retrain on real annotation
exports (``exprscore train-fusion``) for production use.
"""

from pathlib import Path

from exprscore.calibration import build_default_calibration, build_default_fusion_model
from exprscore.fusion import save_model

data_dir = Path(__file__).resolve().parent.parent / "src" / "exprscore" / "data"

calibration = build_default_calibration()
(data_dir / "calibration.json").write_text(calibration.to_json() + "\n", encoding="utf-8")
print(f"wrote {data_dir / 'calibration.json'}")
for name in sorted(calibration.feature_means):
    print(
        f"  {name:<22} mean {calibration.feature_means[name]:8.3f} "
        f"std {calibration.feature_stds[name]:7.3f}"
    )

model = build_default_fusion_model()
save_model(model, data_dir / "fusion_default.json")
print(f"wrote {data_dir / 'fusion_default.json'} ({len(model.trees)} trees)")
