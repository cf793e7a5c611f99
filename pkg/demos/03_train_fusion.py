"""Train the preference fusion model on synthetic ratings and inspect it.

The target mimics a rater who mostly averages emotion and prosody but
discounts clips that do not sound spontaneous. Shows the per-round RMSE
trace (always non-increasing on the training split), held-out error, and
the exact save/load round-trip.
"""

import tempfile
from pathlib import Path

import numpy as np

from exprscore import PreferenceDataset, TrainParams, load_model, predict, save_model, train_fusion
from exprscore.fusion import predict_batch

rng = np.random.default_rng(2024)
x = rng.uniform(0, 100, size=(480, 3))  # s_emo, s_pros, s_spon
target = np.where(
    x[:, 2] > 40,
    0.45 * x[:, 0] + 0.45 * x[:, 1] + 0.1 * x[:, 2],
    0.25 * (x[:, 0] + x[:, 1]) * (x[:, 2] / 40.0),
)
target = np.clip(target + rng.normal(scale=2.0, size=len(target)), 0, 100)

data = PreferenceDataset(x, target, provenance="synthetic-demo")
model = train_fusion(data, TrainParams(rounds=300, seed=0))

log = model.training_log
print(f"kept {len(model.trees)} boosting rounds (early stopping trimmed the rest)")
for entry in log[:3] + log[len(log) // 2 : len(log) // 2 + 1] + log[-3:]:
    val = f"  val {entry['val_rmse']:6.2f}" if "val_rmse" in entry else ""
    print(f"  round {entry['round']:>3}: train RMSE {entry['train_rmse']:6.2f}{val}")

x_test = rng.uniform(0, 100, size=(200, 3))
y_test = np.where(
    x_test[:, 2] > 40,
    0.45 * x_test[:, 0] + 0.45 * x_test[:, 1] + 0.1 * x_test[:, 2],
    0.25 * (x_test[:, 0] + x_test[:, 1]) * (x_test[:, 2] / 40.0),
)
rmse = float(np.sqrt(np.mean((predict_batch(model, x_test) - np.clip(y_test, 0, 100)) ** 2)))
print(f"held-out RMSE: {rmse:.2f}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "fusion.json"
    save_model(model, path)
    again = load_model(path)
    probe = [70.0, 60.0, 30.0]
    print(f"model file: {path.stat().st_size} bytes")
    print(f"predict({probe}) = {predict(model, probe):.3f} == {predict(again, probe):.3f} after reload")
