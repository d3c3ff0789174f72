"""Preference inference from demonstration summaries.

A trained dynamic-weight agent is swept across the preference simplex; each
grid weight yields one greedy rollout whose cumulative reward vector becomes
a training feature and the weight its label. A small softmax-output MLP then
regresses standardized features back to weights, so an unseen demonstration's
cumulative reward vector can be mapped to the preference that plausibly
generated it.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import nn
from .agent import rollout
from .datahub import DataWindow
from .env import EnvConfig, PreferenceWeights, RewardVector, WindowStats
from .errors import DegenerateFeature, InsufficientData, InvalidStep

FEATURE_DIM = 2


class DemoRecord(NamedTuple):
    features: RewardVector
    label: PreferenceWeights


@dataclass(frozen=True)
class DwpiHyper:
    epochs: int = 1500
    batch_size: int = 32
    learning_rate: float = 0.01
    hidden: tuple[int, ...] = (16, 16, 8)

    def __post_init__(self):
        if min(self.epochs, self.batch_size) < 1 or self.learning_rate <= 0:
            raise ValueError("hyperparameters must be positive")

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "hidden": list(self.hidden),
        }

    @staticmethod
    def from_dict(payload: dict) -> "DwpiHyper":
        return DwpiHyper(
            epochs=int(payload["epochs"]),
            batch_size=int(payload["batch_size"]),
            learning_rate=float(payload["learning_rate"]),
            hidden=tuple(int(h) for h in payload["hidden"]),
        )


def weight_grid(step: float) -> list[PreferenceWeights]:
    """Evenly spaced simplex sweep, ascending in w_cost; step must divide 1."""
    if not 0 < step <= 1:
        raise InvalidStep(f"step {step} outside (0, 1]")
    count = 1.0 / step
    if abs(count - round(count)) > 1e-9:
        raise InvalidStep(f"1/{step} is not an integer")
    n = round(count)
    return [PreferenceWeights(k * step, 1.0 - k * step) for k in range(n + 1)]


def build_dataset(q_net: nn.Mlp, window: DataWindow, config: EnvConfig,
                  grid: list[PreferenceWeights],
                  stats: WindowStats | None = None) -> list[DemoRecord]:
    """One greedy rollout per grid weight; the conditioned policy is
    deterministic so a single rollout per weight suffices."""
    if stats is None:
        stats = WindowStats.from_window(window)
    records = []
    for weights in grid:
        _, total = rollout(q_net, weights, window, config, stats, greedy=True)
        records.append(DemoRecord(total, weights))
    return records


@dataclass(frozen=True)
class FeatureScaler:
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std)}

    @staticmethod
    def from_dict(payload: dict) -> "FeatureScaler":
        return FeatureScaler(
            mean=tuple(float(v) for v in payload["mean"]),
            std=tuple(float(v) for v in payload["std"]),
        )


def _feature_matrix(records: list[DemoRecord]) -> np.ndarray:
    return np.array([[r.features.cost, r.features.comfort] for r in records])


def _label_matrix(records: list[DemoRecord]) -> np.ndarray:
    return np.array([[r.label.w_cost, r.label.w_comf] for r in records])


def fit_scaler(records: list[DemoRecord]) -> FeatureScaler:
    """Per-feature mean and population standard deviation."""
    if len(records) < 2:
        raise InsufficientData("need at least 2 records to fit a scaler")
    X = _feature_matrix(records)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    if np.any(std <= 0):
        flat = int(np.argmin(std))
        raise DegenerateFeature(f"feature {flat} has zero variance")
    return FeatureScaler(tuple(float(m) for m in mean), tuple(float(s) for s in std))


def apply_scaler(scaler: FeatureScaler, features: RewardVector) -> np.ndarray:
    raw = np.array([features.cost, features.comfort])
    return (raw - np.asarray(scaler.mean)) / np.asarray(scaler.std)


def train_dwpi(records: list[DemoRecord], hyper: DwpiHyper,
               seed: int) -> tuple[nn.Mlp, FeatureScaler]:
    """Fit the softmax regression from standardized demonstration features
    to preference weights with minibatch SGD on the MSE loss."""
    if len(records) < hyper.batch_size:
        raise InsufficientData(
            f"{len(records)} records < batch size {hyper.batch_size}"
        )
    scaler = fit_scaler(records)
    mean = np.asarray(scaler.mean)
    std = np.asarray(scaler.std)
    X = (_feature_matrix(records) - mean) / std
    Y = _label_matrix(records)

    init_ss, loop_ss = np.random.SeedSequence(seed).spawn(2)
    net = nn.Mlp.initialize(
        [FEATURE_DIM, *hyper.hidden, 2], output_activation="softmax", seed=init_ss
    )
    spec = nn.TrainSpec(
        learning_rate=hyper.learning_rate,
        batch_size=hyper.batch_size,
        epochs=hyper.epochs,
    )
    nn.train_regression(net, X, Y, spec, np.random.default_rng(loop_ss))
    return net, scaler


def training_mse(model: nn.Mlp, scaler: FeatureScaler,
                 records: list[DemoRecord]) -> float:
    mean = np.asarray(scaler.mean)
    std = np.asarray(scaler.std)
    X = (_feature_matrix(records) - mean) / std
    return nn.mse_loss(nn.forward_batch(model, X), _label_matrix(records))


def infer(model: nn.Mlp, scaler: FeatureScaler,
          features: RewardVector) -> PreferenceWeights:
    """Softmax output on the standardized features; always on the simplex."""
    out = nn.forward(model, apply_scaler(scaler, features))
    return PreferenceWeights(float(out[0]), float(out[1]))


# --- persistence ---

DATASET_HEADER = ["cum_cost", "cum_comfort", "w_cost", "w_comf"]


def save_dataset(records: list[DemoRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(DATASET_HEADER)
        for r in records:
            writer.writerow(
                [repr(r.features.cost), repr(r.features.comfort),
                 repr(r.label.w_cost), repr(r.label.w_comf)]
            )


def load_dataset(path: str | Path) -> list[DemoRecord]:
    records = []
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            records.append(
                DemoRecord(
                    RewardVector(float(row["cum_cost"]), float(row["cum_comfort"])),
                    PreferenceWeights(float(row["w_cost"]), float(row["w_comf"])),
                )
            )
    return records


def save_model(path: str | Path, model: nn.Mlp, scaler: FeatureScaler,
               hyper: DwpiHyper, seed: int) -> None:
    """Model JSON plus a .meta.json sidecar carrying the scaler."""
    path = Path(path)
    nn.save(model, path)
    meta = {"scaler": scaler.to_dict(), "hyper": hyper.to_dict(), "seed": seed}
    _meta_path(path).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> tuple[nn.Mlp, FeatureScaler, DwpiHyper, int]:
    path = Path(path)
    model = nn.load(path)
    meta = json.loads(_meta_path(path).read_text(encoding="utf-8"))
    return (
        model,
        FeatureScaler.from_dict(meta["scaler"]),
        DwpiHyper.from_dict(meta["hyper"]),
        int(meta["seed"]),
    )


def _meta_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")
