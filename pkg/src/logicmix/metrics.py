"""Average precision and mean average precision."""
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DimensionError
from .ternary import UNKNOWN_CODE


def average_precision(scores, labels) -> float:
    """AP of one ranking: mean precision at the rank of each positive.

    Items are ranked by descending score; ties keep their original order
    (stable sort), which makes the result deterministic on discrete scores.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DimensionError("scores and labels must be 1-D of equal length")
    if np.any(np.isnan(scores)):
        raise ContractViolation("scores contain NaN")
    rel = labels.astype(bool)
    n_pos = np.count_nonzero(rel)
    if n_pos == 0:
        raise ContractViolation("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    hits = rel[order]
    precision = np.cumsum(hits) / np.arange(1, len(hits) + 1)
    return float(precision[hits].sum() / n_pos)


@dataclass(frozen=True)
class Metrics:
    per_category_ap: np.ndarray  # NaN where a category has no positive
    mean_ap: float

    def to_json(self) -> dict:
        return {"map": self.mean_ap,
                "per_category_ap": [None if np.isnan(a) else float(a) for a in self.per_category_ap]}


def mean_ap(scores, labels) -> Metrics:
    """Per-category AP over an N x C score matrix; unknown (-1) labels are skipped."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 2:
        raise DimensionError(f"score matrix {scores.shape} and label matrix {labels.shape} differ")
    aps = np.full(scores.shape[1], np.nan)
    for c in range(scores.shape[1]):
        known = labels[:, c] != UNKNOWN_CODE
        col = labels[known, c]
        if np.any(col == 1):
            aps[c] = average_precision(scores[known, c], col == 1)
    valid = ~np.isnan(aps)
    if not valid.any():
        raise ContractViolation("no category has a positive label")
    return Metrics(aps, float(aps[valid].mean()))
