"""The LogicMix augmentation pipeline.

With probability ``s`` an input sample is mixed with ``K - 1`` companions
drawn from the dataset, where ``K ~ U{k_min, k_max}``; otherwise it passes
through unchanged.

Every call consumes exactly ``k_max + 1`` uniform draws from its stream
(coin, K, then ``k_max - 1`` companion draws) whatever branch is taken, so
outputs depend only on (seed, epoch, index) and never on scheduling.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ContractViolation, InsufficientDataset
from .mixing import Sample, mix_samples

_U64 = 2**64


@dataclass(frozen=True)
class LogicMixConfig:
    s: float = 0.5
    k_min: int = 2
    k_max: int = 3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ContractViolation(f"s must lie in [0, 1], got {self.s}")
        if int(self.k_min) != self.k_min or int(self.k_max) != self.k_max:
            raise ContractViolation("k_min and k_max must be integers")
        if not 1 <= self.k_min <= self.k_max:
            raise ContractViolation(f"need 1 <= k_min <= k_max, got {self.k_min}, {self.k_max}")
        if not 0 <= self.seed < _U64:
            raise ContractViolation("seed must be an unsigned 64-bit integer")

    @property
    def draws_per_call(self) -> int:
        return self.k_max + 1


def rng_stream(seed: int, *stream_id: int) -> np.random.Generator:
    """Generator keyed by ``(seed, *stream_id)``; identical keys give identical draws."""
    key = [int(seed), *(int(k) for k in stream_id)]
    if any(k < 0 for k in key):
        raise ContractViolation("rng stream keys must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence(key))


@dataclass(frozen=True)
class MixPlan:
    augment: bool
    k: Optional[int] = None
    companion_indices: Tuple[int, ...] = ()

    @property
    def participants(self) -> int:
        return self.k if self.augment else 1


def _check_draw_args(config: LogicMixConfig, dataset_size: int, input_index: int):
    if dataset_size < 1:
        raise ContractViolation("dataset must contain at least one sample")
    if not 0 <= input_index < dataset_size:
        raise ContractViolation(f"input index {input_index} outside dataset of size {dataset_size}")
    if config.s > 0 and config.k_max >= 2 and dataset_size < config.k_max:
        raise InsufficientDataset(
            f"k_max={config.k_max} needs at least {config.k_max} samples, dataset has {dataset_size}")


def plan_from_uniforms(config: LogicMixConfig, dataset_size: int, input_index: int,
                       u: np.ndarray) -> MixPlan:
    """Turn ``k_max + 1`` uniforms in [0, 1) into a plan."""
    if not u[0] < config.s:
        return MixPlan(False)
    span = config.k_max - config.k_min + 1
    k = min(config.k_min + int(u[1] * span), config.k_max)
    # partial Fisher-Yates over the n - 1 indices other than the input;
    # a dict keeps it O(k) in memory for large datasets
    m = dataset_size - 1
    swapped = {}
    companions = []
    for j in range(k - 1):
        r = j + min(int(u[2 + j] * (m - j)), m - j - 1)
        pick = swapped.get(r, r)
        swapped[r] = swapped.get(j, j)
        companions.append(pick if pick < input_index else pick + 1)
    return MixPlan(True, k, tuple(companions))


def draw_plan(config: LogicMixConfig, dataset_size: int, input_index: int,
              rng: np.random.Generator) -> MixPlan:
    _check_draw_args(config, dataset_size, input_index)
    return plan_from_uniforms(config, dataset_size, input_index, rng.random(config.draws_per_call))


def apply(sample: Sample, dataset, config: LogicMixConfig, rng: np.random.Generator,
          pre_transform: Optional[Callable[[Sample], Sample]] = None,
          index: Optional[int] = None) -> Sample:
    """Run one sample through LogicMix.

    ``dataset`` needs ``len()``, ``sample(i)`` and ``index_of(id)``; ``index``
    skips the id lookup when the caller already knows it.
    """
    if index is None:
        index = dataset.index_of(sample.id)
    plan = draw_plan(config, len(dataset), index, rng)
    if not plan.augment:
        return sample
    participants = [sample] + [dataset.sample(i) for i in plan.companion_indices]
    if pre_transform is not None:
        participants = [pre_transform(p) for p in participants]
    return mix_samples(participants)


class LogicMix:
    """Callable pipeline bound to a config; streams are keyed by (seed, epoch, index)."""

    def __init__(self, config: LogicMixConfig, pre_transform=None):
        self.config = config
        self.pre_transform = pre_transform

    def stream(self, epoch: int, index: int) -> np.random.Generator:
        return rng_stream(self.config.seed, epoch, index)

    def plan(self, dataset_size: int, index: int, epoch: int = 0) -> MixPlan:
        return draw_plan(self.config, dataset_size, index, self.stream(epoch, index))

    def __call__(self, dataset, index: int, epoch: int = 0) -> Sample:
        return apply(dataset.sample(index), dataset, self.config, self.stream(epoch, index),
                     self.pre_transform, index=index)

    def __repr__(self):
        c = self.config
        return f"LogicMix(s={c.s}, k_min={c.k_min}, k_max={c.k_max}, seed={c.seed})"
