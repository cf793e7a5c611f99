"""Gradient-boosted regression trees fusing sub-scores into one 0-100 score.

Least-squares boosting: each round fits a depth-limited regression tree to
the current residuals by exact split enumeration over the three features,
then steps the prediction by ``shrinkage`` times the leaf means. Training
is fully deterministic for a fixed dataset, parameters and seed: the seed
fixes the train/validation split, equal-gain splits break toward the
lowest feature index and then the lowest threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .scorers import SubScores

FEATURE_NAMES = ("s_emo", "s_pros", "s_spon")
FORMAT_VERSION = 1


class InsufficientData(ValueError):
    pass


class DegenerateTarget(Warning):
    pass


class VersionMismatch(ValueError):
    pass


class CorruptModel(ValueError):
    pass


@dataclass
class TrainParams:
    rounds: int = 200
    max_depth: int = 3
    shrinkage: float = 0.1
    min_leaf: int = 5
    validation_fraction: float = 0.2
    patience: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1 or self.max_depth < 1 or self.min_leaf < 1:
            raise ValueError("rounds, max_depth and min_leaf must be positive")
        if not (0.0 < self.shrinkage <= 1.0):
            raise ValueError("shrinkage must be in (0, 1]")
        if not (0.0 <= self.validation_fraction < 1.0):
            raise ValueError("validation_fraction must be in [0, 1)")


@dataclass
class PreferenceDataset:
    """Rows of (sub-scores, human target) used to fit the fusion function."""

    subscores: np.ndarray  # (n, 3) in feature order s_emo, s_pros, s_spon
    targets: np.ndarray  # (n,) in [0, 100]
    provenance: str = ""

    def __post_init__(self):
        self.subscores = np.asarray(self.subscores, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.subscores.ndim != 2 or self.subscores.shape[1] != 3:
            raise ValueError("subscores must be an (n, 3) array")
        if len(self.subscores) != len(self.targets):
            raise ValueError("subscores/targets length mismatch")
        if len(self.targets) and (self.targets.min() < 0 or self.targets.max() > 100):
            raise ValueError("targets must lie in [0, 100]")

    @classmethod
    def from_rows(cls, rows, provenance: str = "") -> "PreferenceDataset":
        xs, ys = [], []
        for scores, target in rows:
            xs.append(scores.as_vector() if isinstance(scores, SubScores) else list(scores))
            ys.append(float(target))
        return cls(np.array(xs, dtype=np.float64), np.array(ys), provenance=provenance)

    def __len__(self) -> int:
        return len(self.targets)


@dataclass
class FusionModel:
    base_score: float
    trees: list[dict]
    shrinkage: float
    feature_names: tuple[str, ...] = FEATURE_NAMES
    output_clamp: tuple[float, float] = (0.0, 100.0)
    format_version: int = FORMAT_VERSION
    degenerate: bool = False
    training_log: list[dict] = field(default_factory=list)


def _best_split(x: np.ndarray, residuals: np.ndarray, min_leaf: int):
    """Exact best split over all features; returns (gain, feature, threshold)."""
    n = len(residuals)
    total = residuals.sum()
    parent = total * total / n
    best = None
    for f in range(x.shape[1]):
        values = x[:, f]
        order = np.argsort(values, kind="stable")
        xs = values[order]
        prefix = np.cumsum(residuals[order])

        cut = np.nonzero(xs[:-1] < xs[1:])[0]  # split between distinct values
        if len(cut) == 0:
            continue
        n_left = cut + 1
        n_right = n - n_left
        ok = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not ok.any():
            continue
        cut = cut[ok]
        n_left = n_left[ok]
        n_right = n_right[ok]
        left_sum = prefix[cut]
        gains = left_sum**2 / n_left + (total - left_sum) ** 2 / n_right - parent
        i = int(np.argmax(gains))  # first max -> lowest threshold
        gain = float(gains[i])
        if gain > 1e-12 and (best is None or gain > best[0]):
            threshold = float((xs[cut[i]] + xs[cut[i] + 1]) / 2.0)
            best = (gain, f, threshold)
    return best


def _build_tree(x, residuals, depth, max_depth, min_leaf) -> dict:
    if depth >= max_depth or len(residuals) < 2 * min_leaf:
        return {"value": float(residuals.mean())}
    split = _best_split(x, residuals, min_leaf)
    if split is None:
        return {"value": float(residuals.mean())}
    _, feature, threshold = split
    mask = x[:, feature] < threshold
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _build_tree(x[mask], residuals[mask], depth + 1, max_depth, min_leaf),
        "right": _build_tree(x[~mask], residuals[~mask], depth + 1, max_depth, min_leaf),
    }


def _tree_predict(tree: dict, x: np.ndarray) -> np.ndarray:
    out = np.empty(len(x))
    stack = [(tree, np.arange(len(x)))]
    while stack:
        node, idx = stack.pop()
        if "value" in node:
            out[idx] = node["value"]
            continue
        mask = x[idx, node["feature"]] < node["threshold"]
        stack.append((node["left"], idx[mask]))
        stack.append((node["right"], idx[~mask]))
    return out


def _rmse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((a - b) ** 2)))


def train_fusion(data: PreferenceDataset, params: TrainParams | None = None) -> FusionModel:
    """Fit the boosted ensemble.

    Validation rows (chosen by the seed) drive early stopping: training
    halts once validation RMSE has not improved for ``patience`` rounds and
    the ensemble is trimmed back to its best round.
    """
    params = params or TrainParams()
    n = len(data)
    if n < 2:
        raise InsufficientData(f"need at least 2 rows to train, got {n}")

    if float(np.ptp(data.targets)) == 0.0:
        return FusionModel(
            base_score=float(data.targets[0]),
            trees=[],
            shrinkage=params.shrinkage,
            degenerate=True,
        )

    rng = np.random.default_rng(params.seed)
    perm = rng.permutation(n)
    n_val = int(round(n * params.validation_fraction))
    if n - n_val < 2:
        n_val = 0
    val_idx = perm[:n_val]
    train_idx = perm[n_val:]

    x_train = data.subscores[train_idx]
    y_train = data.targets[train_idx]
    x_val = data.subscores[val_idx]
    y_val = data.targets[val_idx]

    base = float(y_train.mean())
    pred_train = np.full(len(train_idx), base)
    pred_val = np.full(len(val_idx), base)

    trees: list[dict] = []
    log: list[dict] = []
    best_val = np.inf
    best_round = 0
    stale = 0

    for round_no in range(1, params.rounds + 1):
        residuals = y_train - pred_train
        tree = _build_tree(x_train, residuals, 0, params.max_depth, params.min_leaf)
        pred_train = pred_train + params.shrinkage * _tree_predict(tree, x_train)
        trees.append(tree)

        entry = {"round": round_no, "train_rmse": _rmse(y_train, pred_train)}
        if n_val:
            pred_val = pred_val + params.shrinkage * _tree_predict(tree, x_val)
            val_rmse = _rmse(y_val, pred_val)
            entry["val_rmse"] = val_rmse
            if val_rmse < best_val - 1e-12:
                best_val = val_rmse
                best_round = round_no
                stale = 0
            else:
                stale += 1
                if stale >= params.patience:
                    log.append(entry)
                    break
        log.append(entry)

    if n_val and best_round:
        trees = trees[:best_round]
        log = log[:best_round]

    return FusionModel(
        base_score=base,
        trees=trees,
        shrinkage=params.shrinkage,
        training_log=log,
    )


def predict(model: FusionModel, scores) -> float:
    """Fused expressiveness score for one set of sub-scores, clamped to [0, 100]."""
    if isinstance(scores, SubScores):
        vec = np.array([scores.as_vector()])
    else:
        vec = np.asarray(scores, dtype=np.float64).reshape(1, 3)
    value = model.base_score
    for tree in model.trees:
        value += model.shrinkage * float(_tree_predict(tree, vec)[0])
    lo, hi = model.output_clamp
    return float(min(hi, max(lo, value)))


def predict_batch(model: FusionModel, matrix: np.ndarray) -> np.ndarray:
    x = np.asarray(matrix, dtype=np.float64)
    values = np.full(len(x), model.base_score)
    for tree in model.trees:
        values = values + model.shrinkage * _tree_predict(tree, x)
    lo, hi = model.output_clamp
    return np.clip(values, lo, hi)


def save_model(model: FusionModel, path) -> None:
    payload = {
        "format_version": model.format_version,
        "base_score": model.base_score,
        "shrinkage": model.shrinkage,
        "feature_names": list(model.feature_names),
        "output_clamp": list(model.output_clamp),
        "degenerate": model.degenerate,
        "trees": model.trees,
        "training_log": model.training_log,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))


def load_model(path) -> FusionModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"cannot parse model file: {exc}") from exc
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CorruptModel("model file missing format_version")
    if payload["format_version"] != FORMAT_VERSION:
        raise VersionMismatch(
            f"model format {payload['format_version']} != supported {FORMAT_VERSION}"
        )
    try:
        return FusionModel(
            base_score=float(payload["base_score"]),
            trees=payload["trees"],
            shrinkage=float(payload["shrinkage"]),
            feature_names=tuple(payload["feature_names"]),
            output_clamp=tuple(payload["output_clamp"]),
            degenerate=bool(payload.get("degenerate", False)),
            training_log=payload.get("training_log", []),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"model file structurally invalid: {exc}") from exc
