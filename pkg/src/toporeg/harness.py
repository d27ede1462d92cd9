"""Experiment harness: seeded runs over three regimes with per-step metrics.

A run trains the classifier on synthetic Gaussian blobs (or a labeled CSV)
under one of three regimes: no regularization, entropy loss on selected
bars, or entropy loss on all bars.  Every step logs the training-loss
breakdown, validation accuracy, and the first three anisotropy scores (raw
and centered) of the representation layer on a fixed held-out batch, so
trajectories are directly comparable across regimes.  Summaries average each
metric over the last 30% of steps per seed, then report mean and population
standard deviation over seeds.

All randomness (data, init, batch order) derives from the seed: two runs
with an identical config and seed produce identical metric streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .cloudfile import load_cloud_csv
from .geometry import PointCloud, anisotropy_profile
from .model import MLP, AdamState, WarmupSchedule, adam_step, backward_combined, forward
from .regularizer import SelectionMode

REGIMES = ("none", "selected_bars", "all_bars")

# cluster noise scale relative to the center radius; spread = 0 collapses
# every class onto its center
BLOB_NOISE_RATIO = 0.5

TRAIN_FRACTION = 0.8
EVAL_BATCH_SIZE = 64
SUMMARY_TAIL_FRACTION = 0.3

ANISOTROPY_KS = (1, 2, 3)

# substreams for per-seed generators, so data/init/batch-order draws stay
# independent of each other
_STREAM_DATA_SPLIT = 101
_STREAM_INIT = 202
_STREAM_BATCHES = 303


class ConfigError(ValueError):
    """Invalid experiment configuration; message starts with the field path."""


@dataclass
class BlobSpec:
    n_per_class: int = 160
    n_classes: int = 2
    dim: int = 16
    spread: float = 3.0


@dataclass
class ExperimentConfig:
    regime: str = "selected_bars"
    base_lr: float = 5e-3
    weight_decay: float = 5e-4
    epochs: int = 60
    batch_size: int = 64
    entropy_weight: float = 1.0
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    data: BlobSpec | str = field(default_factory=BlobSpec)
    hidden_dims: list[int] = field(default_factory=lambda: [32, 16])

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"regime: must be one of {REGIMES}, got {self.regime!r}")
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ConfigError(f"epochs: must be an integer >= 1, got {self.epochs!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 4:
            raise ConfigError(f"batch_size: must be an integer >= 4, got {self.batch_size!r}")
        if not (np.isfinite(self.base_lr) and self.base_lr > 0):
            raise ConfigError(f"base_lr: must be positive, got {self.base_lr!r}")
        if not (np.isfinite(self.weight_decay) and self.weight_decay >= 0):
            raise ConfigError(f"weight_decay: must be >= 0, got {self.weight_decay!r}")
        if not (np.isfinite(self.entropy_weight) and self.entropy_weight >= 0):
            raise ConfigError(f"entropy_weight: must be >= 0, got {self.entropy_weight!r}")
        if not self.seeds:
            raise ConfigError("seeds: need at least one seed")
        if not all(isinstance(s, int) for s in self.seeds):
            raise ConfigError("seeds: must all be integers")
        if not self.hidden_dims or not all(isinstance(h, int) and h >= 1 for h in self.hidden_dims):
            raise ConfigError(f"hidden_dims: must be a nonempty list of positive integers, got {self.hidden_dims!r}")

    @property
    def selection_mode(self) -> SelectionMode | None:
        if self.regime == "none":
            return None
        return SelectionMode(self.regime)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config: must be a JSON object")
        known = {
            "regime", "base_lr", "weight_decay", "epochs", "batch_size",
            "entropy_weight", "seeds", "data", "hidden_dims",
        }
        for key in raw:
            if key not in known:
                raise ConfigError(f"{key}: unknown config field")
        kwargs = dict(raw)
        if "data" in kwargs:
            data = kwargs["data"]
            if isinstance(data, str):
                pass
            elif isinstance(data, dict):
                if "csv" in data:
                    kwargs["data"] = str(data["csv"])
                else:
                    try:
                        kwargs["data"] = BlobSpec(**data)
                    except TypeError as exc:
                        raise ConfigError(f"data: {exc}") from None
            else:
                raise ConfigError("data: must be a blob-spec object or a csv path")
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"config: {exc}") from None

    def to_dict(self) -> dict:
        out = asdict(self)
        return out


@dataclass
class RunMetrics:
    """Per-step records for one seed; records are dicts of scalar metrics."""

    seed: int
    records: list[dict]
    diverged: bool = False
    divergence_step: int | None = None


def generate_blobs(seed: int, n_per_class: int, n_classes: int, dim: int, spread: float):
    """Seeded Gaussian blobs with unit-norm centers scaled by ``spread``.

    Cluster noise has standard deviation BLOB_NOISE_RATIO * spread, so the
    geometry is scale-free in ``spread`` and spread = 0 collapses each class
    onto its center.  Returns (cloud, labels, train_idx, val_idx) with a
    deterministic shuffled 80/20 split.
    """
    if n_per_class < 8:
        raise ValueError(f"n_per_class must be >= 8, got {n_per_class}")
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if n_classes < 2:
        raise ValueError(f"n_classes must be >= 2, got {n_classes}")
    if not (np.isfinite(spread) and spread >= 0):
        raise ValueError(f"spread must be a finite nonnegative real, got {spread}")

    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(n_classes, dim))
    centers = spread * raw / np.linalg.norm(raw, axis=1, keepdims=True)
    points = np.concatenate(
        [
            centers[c] + BLOB_NOISE_RATIO * spread * rng.normal(size=(n_per_class, dim))
            for c in range(n_classes)
        ]
    )
    labels = np.repeat(np.arange(n_classes), n_per_class)
    n_total = n_classes * n_per_class
    perm = rng.permutation(n_total)
    n_train = int(round(TRAIN_FRACTION * n_total))
    return PointCloud(points), labels, perm[:n_train], perm[n_train:]


def _load_dataset(cfg: ExperimentConfig, seed: int):
    if isinstance(cfg.data, BlobSpec):
        spec = cfg.data
        return generate_blobs(seed, spec.n_per_class, spec.n_classes, spec.dim, spec.spread)
    loaded = load_cloud_csv(cfg.data)
    if loaded.labels is None:
        raise ConfigError("data: csv file must carry a trailing 'label' column for training")
    n_total = loaded.points.shape[0]
    rng = np.random.default_rng([seed, _STREAM_DATA_SPLIT])
    perm = rng.permutation(n_total)
    n_train = int(round(TRAIN_FRACTION * n_total))
    return PointCloud(loaded.points), loaded.labels, perm[:n_train], perm[n_train:]


def _evaluate(mlp, eval_batch, val_x, val_y) -> dict:
    logits, _, _ = forward(mlp, val_x)
    accuracy = float((np.argmax(logits, axis=1) == val_y).mean())
    _, reps, _ = forward(mlp, eval_batch)
    k_max = min(max(ANISOTROPY_KS), min(reps.shape))
    raw = anisotropy_profile(reps, k_max=k_max, centered=False)
    cen = anisotropy_profile(reps, k_max=k_max, centered=True)
    rec = {"val_accuracy": accuracy}
    for k in ANISOTROPY_KS:
        rec[f"anisotropy_raw_{k}"] = raw.score(k) if k <= k_max else 0.0
        rec[f"anisotropy_centered_{k}"] = cen.score(k) if k <= k_max else 0.0
    return rec


def run_seed(cfg: ExperimentConfig, seed: int) -> RunMetrics:
    """Train one seed to completion (or divergence) and log every step."""
    cloud, labels, train_idx, val_idx = _load_dataset(cfg, seed)
    x, y = cloud.data, labels
    if val_idx.size < 2 or train_idx.size < cfg.batch_size:
        raise ConfigError("data: dataset too small for the requested batch size and split")

    n_classes = int(y.max()) + 1
    dims = [x.shape[1], *cfg.hidden_dims, n_classes]
    mlp = MLP.init(dims, np.random.default_rng([seed, _STREAM_INIT]))
    params = mlp.parameters()
    state = AdamState.for_params(params)

    steps_per_epoch = train_idx.size // cfg.batch_size
    total_steps = cfg.epochs * steps_per_epoch
    sched = WarmupSchedule.for_total(cfg.base_lr, total_steps)
    batch_rng = np.random.default_rng([seed, _STREAM_BATCHES])

    eval_batch = x[val_idx[:EVAL_BATCH_SIZE]]
    val_x, val_y = x[val_idx], y[val_idx]
    mode = cfg.selection_mode

    records: list[dict] = []
    step = 0
    for _ in range(cfg.epochs):
        order = batch_rng.permutation(train_idx)
        for b in range(steps_per_epoch):
            batch = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            breakdown, grads = backward_combined(
                mlp, x[batch], y[batch], mode, cfg.entropy_weight
            )
            if not np.isfinite(breakdown.total):
                return RunMetrics(seed=seed, records=records, diverged=True, divergence_step=step + 1)
            adam_step(params, grads, state, sched, cfg.weight_decay)
            step += 1
            rec = {
                "step": step,
                "ce": breakdown.ce,
                "ent": breakdown.ent,
                "total": breakdown.total,
            }
            rec.update(_evaluate(mlp, eval_batch, val_x, val_y))
            records.append(rec)
    return RunMetrics(seed=seed, records=records)


def run_experiment(cfg: ExperimentConfig) -> list[RunMetrics]:
    """Run every configured seed sequentially; results ordered like cfg.seeds."""
    return [run_seed(cfg, seed) for seed in cfg.seeds]


def tail_mean(records: list[dict], metric: str) -> float:
    """Average of a metric over the last 30% of steps."""
    count = len(records)
    start = int(np.floor((1.0 - SUMMARY_TAIL_FRACTION) * count))
    values = [rec[metric] for rec in records[start:]]
    return float(np.mean(values))


def summarize(runs: list[RunMetrics]) -> dict:
    """Per-metric mean and population std over seeds of last-30% averages."""
    runs = [r for r in runs if r.records]
    if not runs or any(len(r.records) < 10 for r in runs):
        raise ValueError("summarize needs at least one run with >= 10 records each")
    metrics = [key for key in runs[0].records[0] if key != "step"]
    out: dict = {}
    for metric in metrics:
        per_seed = [tail_mean(r.records, metric) for r in runs]
        out[metric] = {
            "mean": float(np.mean(per_seed)),
            "std": float(np.std(per_seed)),
            "per_seed": per_seed,
        }
    return out
