"""Curriculum Labeling with decoupled thresholds.

At the end of an epoch, every unknown label whose logit is confidently high
(> theta_plus) or low (< theta_minus) receives a pseudo-label. The
pseudo-labels are visible during the following epoch only.
"""
from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

import numpy as np

from .errors import ContractViolation
from .ternary import UNKNOWN_CODE, TernaryLabel


@dataclass(frozen=True)
class CurriculumConfig:
    theta_plus: float = 2.0
    theta_minus: float = -2.0

    def __post_init__(self):
        if not self.theta_minus < self.theta_plus:
            raise ContractViolation("theta_minus must be below theta_plus")


@dataclass(frozen=True)
class PseudoLabelSet:
    """Pseudo-labels keyed by (sample index, category), stamped with an epoch."""

    positions: np.ndarray  # K x 2 int (sample, category), row-major order
    values: np.ndarray     # K binary labels
    generated_epoch: int
    shape: Tuple[int, int]

    @property
    def entries(self) -> Mapping[Tuple[int, int], int]:
        return {(int(i), int(c)): int(v) for (i, c), v in zip(self.positions, self.values)}

    def __len__(self):
        return len(self.values)

    def as_matrix(self) -> np.ndarray:
        """N x C codes holding the pseudo-label where keyed and -1 elsewhere."""
        out = np.full(self.shape, UNKNOWN_CODE, dtype=np.int8)
        if len(self):
            out[self.positions[:, 0], self.positions[:, 1]] = self.values
        return out

    def to_records(self) -> list:
        return [{"index": int(i), "category": int(c), "label": int(v),
                 "epoch": self.generated_epoch}
                for (i, c), v in zip(self.positions, self.values)]


def generate_pseudo_labels(logits, dataset, config: CurriculumConfig,
                           epoch: int) -> PseudoLabelSet:
    """Pseudo-labels for the dataset's unknown positions; strict inequalities at both thresholds.

    ``dataset`` may be a PartialDataset or a raw N x C code matrix.
    """
    codes = np.asarray(getattr(dataset, "labels", dataset))
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape != codes.shape:
        raise ContractViolation(f"logits shape {logits.shape} != labels shape {codes.shape}")
    if not np.all(np.isfinite(logits)):
        raise ContractViolation("logits must be finite")
    unknown = codes == UNKNOWN_CODE
    pos = unknown & (logits > config.theta_plus)
    neg = unknown & (logits < config.theta_minus)
    keyed = pos | neg
    positions = np.argwhere(keyed)
    values = pos[keyed].astype(np.int8)
    return PseudoLabelSet(positions, values, int(epoch), codes.shape)


class EpochView:
    """Label resolution for one epoch: pseudo-labels if fresh, dataset labels otherwise."""

    def __init__(self, codes: np.ndarray, pseudo: Optional[PseudoLabelSet], epoch: int):
        self._codes = codes
        self.epoch = epoch
        self.active = pseudo is not None and epoch == pseudo.generated_epoch + 1
        self._pseudo = pseudo.as_matrix() if self.active else None

    def __call__(self, index: int, category: int) -> TernaryLabel:
        if self._pseudo is not None and self._pseudo[index, category] != UNKNOWN_CODE:
            return TernaryLabel(int(self._pseudo[index, category]))
        return TernaryLabel(int(self._codes[index, category]))

    def matrix(self) -> np.ndarray:
        if self._pseudo is None:
            return self._codes
        return np.where(self._pseudo != UNKNOWN_CODE, self._pseudo, self._codes).astype(np.int8)


def compose_epoch_view(dataset, pseudo: Optional[PseudoLabelSet], current_epoch: int) -> EpochView:
    codes = np.asarray(getattr(dataset, "labels", dataset))
    if pseudo is not None:
        if pseudo.generated_epoch > current_epoch:
            raise ContractViolation("pseudo-labels come from a later epoch than the query")
        if pseudo.shape != codes.shape:
            raise ContractViolation("pseudo-label set does not match the dataset shape")
    return EpochView(codes, pseudo, current_epoch)
