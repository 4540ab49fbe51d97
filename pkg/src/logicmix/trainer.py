"""Desk-scale trainer: a linear multi-label classifier trained with the
masked asymmetric loss, used to compare augmentation variants on synthetic
partially labeled data."""
import json
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .curriculum import CurriculumConfig, compose_epoch_view, generate_pseudo_labels
from .datasets import PartialDataset, drop_labels
from .errors import ContractViolation, DimensionError
from .loss import LossConfig, masked_asymmetric_loss
from .metrics import Metrics, mean_ap
from .mixing import mix_images
from .pipeline import LogicMixConfig, plan_from_uniforms, rng_stream
from .ternary import NEGATIVE_CODE, UNKNOWN_CODE, mix_codes
from .variants import Variant, VariantConfig, sample_beta, wang_enabled

# stream namespaces under the training seed
_INIT, _SHUFFLE, _AUGMENT = 0, 1, 2


@dataclass
class LinearModel:
    weights: np.ndarray  # D x C
    biases: np.ndarray   # C

    @classmethod
    def init(cls, d: int, c: int, seed: int, scale: float = 0.01) -> "LinearModel":
        rng = rng_stream(seed, _INIT)
        return cls(rng.normal(0.0, scale, (d, c)), np.zeros(c))

    def copy(self) -> "LinearModel":
        return LinearModel(self.weights.copy(), self.biases.copy())


def forward(model: LinearModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.weights.shape[0]:
        raise DimensionError(f"features {x.shape} do not match weights {model.weights.shape}")
    if model.biases.shape != (model.weights.shape[1],):
        raise DimensionError("bias length differs from the category count")
    return x @ model.weights + model.biases


# -- synthetic data ----------------------------------------------------------

def make_synthetic_dataset(n: int, c: int, d: int, seed: int, noise: float = 0.1):
    """Multi-hot samples built from C random unit prototypes in D dims.

    Each category is active with probability 2/C (at least one per sample);
    a sample is the normalised sum of its active prototypes plus Gaussian
    noise, mapped affinely into [0, 1] so it is a valid 1 x 1 x D image.
    Returns ``(features, dataset)``; the dataset is fully labeled and carries
    the features as in-memory images.
    """
    if min(n, c, d) < 1:
        raise ContractViolation("n, c and d must be positive")
    rng = rng_stream(seed)
    protos = rng.normal(size=(c, d))
    protos /= np.linalg.norm(protos, axis=1, keepdims=True)
    active = rng.random((n, c)) < min(2.0 / c, 1.0)
    empty = ~active.any(axis=1)
    active[np.flatnonzero(empty), rng.integers(0, c, size=empty.sum())] = True
    raw = active.astype(np.float64) @ protos
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    raw += rng.normal(0.0, noise, size=raw.shape)
    features = np.clip(0.5 + 0.5 * raw, 0.0, 1.0)
    labels = active.astype(np.int8)
    names = [f"class_{k}" for k in range(c)]
    ids = [f"s{i:06d}" for i in range(n)]
    dataset = PartialDataset(names, ids, labels, ground_truth=labels,
                             images=features.reshape(n, 1, 1, d))
    return features, dataset


@dataclass
class SyntheticTask:
    train_features: np.ndarray
    train: PartialDataset
    test_features: np.ndarray
    test_labels: np.ndarray


def synthetic_task(n_train=2000, n_test=1000, c=10, d=32, known_proportion=0.5,
                   seed=0) -> SyntheticTask:
    """Train/test split drawn from one prototype set; training labels partially dropped."""
    x, full = make_synthetic_dataset(n_train + n_test, c, d, seed)
    train = PartialDataset(full.categories, full.ids[:n_train], full.labels[:n_train],
                           ground_truth=full.labels[:n_train],
                           images=full.images[:n_train])
    if known_proportion < 1:
        train = drop_labels(train, known_proportion, seed)
    return SyntheticTask(x[:n_train], train, x[n_train:], np.array(full.labels[n_train:]))


# -- training ------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.1
    momentum: float = 0.9
    seed: int = 0
    variant: VariantConfig = field(default_factory=VariantConfig)
    logicmix: Optional[LogicMixConfig] = None
    curriculum: Optional[CurriculumConfig] = None
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or not self.learning_rate > 0:
            raise ContractViolation("epochs, batch_size and learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ContractViolation("momentum must lie in [0, 1)")
        if self.variant.variant is Variant.LOGICMIX and self.logicmix is None:
            object.__setattr__(self, "logicmix", LogicMixConfig(seed=self.seed))

    @property
    def name(self) -> str:
        v = self.variant.variant
        if v is Variant.LOGICMIX:
            lm = self.logicmix
            return f"logicmix(s={lm.s},k={lm.k_min}-{lm.k_max})"
        return v.value


def _partner(i: int, u: float, n: int) -> int:
    j = min(int(u * (n - 1)), n - 2)
    return j if j < i else j + 1


def _an(codes: np.ndarray) -> np.ndarray:
    return np.where(codes == UNKNOWN_CODE, NEGATIVE_CODE, codes)


def build_epoch_inputs(features: np.ndarray, codes: np.ndarray, config: TrainConfig,
                       epoch: int):
    """Augmented (inputs, targets) for every training index in one epoch.

    Row i is derived from index i with a fixed number of draws, so the
    result does not depend on batch order. Targets are int8 codes for the
    hard-label variants and float arrays (NaN = unknown) for the soft ones.
    """
    variant = config.variant.variant
    n = len(features)
    if variant is Variant.NO_AUGMENT:
        return features, codes
    rng = rng_stream(config.seed, _AUGMENT, epoch)

    if variant is Variant.LOGICMIX:
        lm = config.logicmix
        uniforms = rng.random((n, lm.draws_per_call))
        xs, ys = features.copy(), codes.copy()
        for i in range(n):
            plan = plan_from_uniforms(lm, n, i, uniforms[i])
            if plan.augment and plan.k > 1:
                rows = (i,) + plan.companion_indices
                xs[i] = mix_images([features[r] for r in rows])
                ys[i] = mix_codes(codes[list(rows)])
        return xs, ys

    partner_u = rng.random(n)
    an = _an(codes)
    if variant is Variant.WANG_AN:
        if not wang_enabled(epoch, config.variant.wang_even_epochs):
            return features, an
        lams = np.full(n, 0.5)
    elif variant is Variant.ML_MIXUP_AN:
        lams = rng.random(n)
    elif variant is Variant.MIXUP_AN:
        lams = np.array([sample_beta(config.variant.alpha, rng) for _ in range(n)])
    elif variant is Variant.MIXUP_PME:
        lams = rng.uniform(config.variant.alpha, 1.0, size=n)
    else:
        raise ContractViolation(f"unsupported variant {variant}")

    xs = np.empty_like(features)
    soft = variant.soft_targets
    ys = np.empty(codes.shape, dtype=np.float64 if soft else np.int8)
    for i in range(n):
        j = _partner(i, partner_u[i], n)
        lam = lams[i]
        xs[i] = mix_images([features[i], features[j]], [lam, 1.0 - lam])
        if variant is Variant.MIXUP_AN:
            ys[i] = lam * an[i] + (1.0 - lam) * an[j]
        elif variant is Variant.MIXUP_PME:
            half_i = np.where(codes[i] == UNKNOWN_CODE, 0.5, codes[i])
            half_j = np.where(codes[j] == UNKNOWN_CODE, 0.5, codes[j])
            row = lam * half_i + (1.0 - lam) * half_j
            row[codes[i] == UNKNOWN_CODE] = np.nan
            ys[i] = row
        else:
            ys[i] = np.maximum(an[i], an[j])
    if soft:
        ys = np.where(np.isnan(ys), ys, np.clip(ys, 0.0, 1.0))
    return xs, ys


@dataclass
class TrainResult:
    model: LinearModel
    losses: List[float]
    pseudo_label_counts: List[int]


def train(features, dataset, config: TrainConfig) -> TrainResult:
    """Minibatch SGD with momentum over ``config.epochs`` epochs."""
    x = np.asarray(features, dtype=np.float64)
    codes = np.asarray(getattr(dataset, "labels", dataset))
    if x.ndim != 2 or len(x) != len(codes):
        raise DimensionError("features and labels disagree in sample count")
    if config.variant.variant is not Variant.NO_AUGMENT and len(x) < 2:
        raise ContractViolation("mixing needs at least two training samples")
    n, d = x.shape
    c = codes.shape[1]
    model = LinearModel.init(d, c, config.seed)
    vw, vb = np.zeros_like(model.weights), np.zeros_like(model.biases)
    pseudo = None
    losses, pseudo_counts = [], []
    for epoch in range(config.epochs):
        view = compose_epoch_view(codes, pseudo, epoch)
        xs, ys = build_epoch_inputs(x, view.matrix(), config, epoch)
        order = rng_stream(config.seed, _SHUFFLE, epoch).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            xb = xs[batch]
            loss, grad = masked_asymmetric_loss(forward(model, xb), ys[batch], config.loss)
            vw = config.momentum * vw - config.learning_rate * (xb.T @ grad)
            vb = config.momentum * vb - config.learning_rate * grad.sum(axis=0)
            model.weights += vw
            model.biases += vb
            epoch_loss += loss * len(batch)
        losses.append(epoch_loss / n)
        if config.curriculum is not None:
            pseudo = generate_pseudo_labels(forward(model, x), codes, config.curriculum, epoch)
            pseudo_counts.append(len(pseudo))
    return TrainResult(model, losses, pseudo_counts)


def evaluate(model: LinearModel, features, labels) -> Metrics:
    return mean_ap(forward(model, features), labels)


# -- comparison ------------------------------------------------------------------

@dataclass
class ComparisonResult:
    rows: List[dict]

    def summary(self) -> List[dict]:
        out = {}
        for row in self.rows:
            out.setdefault(row["variant"], []).append(row["map"])
        table = []
        for name, maps in out.items():
            maps = np.array(maps)
            sd = float(maps.std(ddof=1)) if len(maps) > 1 else 0.0
            table.append({"variant": name, "mean_map": float(maps.mean()), "sd_map": sd,
                          "seeds": len(maps)})
        return table

    def mean_map(self, variant_name: str) -> float:
        for row in self.summary():
            if row["variant"] == variant_name:
                return row["mean_map"]
        raise KeyError(variant_name)

    def to_json(self) -> str:
        return json.dumps({"runs": self.rows, "summary": self.summary()}, indent=2)

    def format_table(self) -> str:
        summary = self.summary()
        width = max(len("variant"), *(len(r["variant"]) for r in summary))
        lines = [f"{'variant':<{width}}  {'mAP %':>8}  {'sd':>6}  seeds"]
        for r in summary:
            lines.append(f"{r['variant']:<{width}}  {100 * r['mean_map']:8.2f}  "
                         f"{100 * r['sd_map']:6.2f}  {r['seeds']}")
        return "\n".join(lines)


def run_comparison(configs: Sequence[TrainConfig], task: Optional[SyntheticTask] = None,
                   seeds: Sequence[int] = (0, 1, 2, 3, 4)) -> ComparisonResult:
    """Train one model per (config, seed) and evaluate mAP on the held-out split."""
    task = task or synthetic_task()
    rows = []
    for config in configs:
        for seed in seeds:
            cfg = replace(config, seed=seed,
                          logicmix=replace(config.logicmix, seed=seed) if config.logicmix else None)
            result = train(task.train_features, task.train, cfg)
            metrics = evaluate(result.model, task.test_features, task.test_labels)
            rows.append({"variant": config.name, "seed": seed, **metrics.to_json()})
    return ComparisonResult(rows)


def default_comparison_configs(base: Optional[TrainConfig] = None,
                               logicmix: Optional[LogicMixConfig] = None) -> List[TrainConfig]:
    base = base or TrainConfig()
    out = []
    for v in Variant:
        lm = (logicmix or LogicMixConfig()) if v is Variant.LOGICMIX else None
        out.append(replace(base, variant=VariantConfig(v), logicmix=lm))
    return out

