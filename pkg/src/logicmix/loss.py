"""Masked asymmetric loss for partially labeled multi-label targets.

Per entry with logit z, p = sigmoid(z), target t in [0, 1]:

    positive term  L+ = -(1 - p)**gamma_plus * log(p)
    negative term  L- = -(p_m)**gamma_minus * log(1 - p_m),  p_m = max(p - m, 0)
    loss           t * L+ + (1 - t) * L-

Unknown targets are masked out; the loss is the mean over known entries.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DimensionError
from .ternary import UNKNOWN_CODE


@dataclass(frozen=True)
class LossConfig:
    gamma_plus: float = 4.0
    gamma_minus: float = 0.0
    margin: float = 0.05

    def __post_init__(self):
        if self.gamma_plus < 0 or self.gamma_minus < 0:
            raise ContractViolation("focusing parameters must be nonnegative")
        if not 0 <= self.margin < 1:
            raise ContractViolation("margin must lie in [0, 1)")


def targets_and_mask(targets):
    """Split ternary codes (-1 unknown) or soft targets (NaN unknown) into (t, mask)."""
    targets = np.asarray(targets)
    if targets.dtype.kind in "iub":
        mask = targets != UNKNOWN_CODE
        t = np.where(mask, targets, 0).astype(np.float64)
    else:
        mask = ~np.isnan(targets)
        t = np.where(mask, targets, 0.0).astype(np.float64)
    if np.any((t < 0) | (t > 1)):
        raise ContractViolation("targets must lie in [0, 1]")
    return t, mask


def _pow(base, exponent):
    # 0 ** 0 == 1, which is the convention both terms rely on
    return np.ones_like(base) if exponent == 0 else base ** exponent


def masked_asymmetric_loss(logits, targets, config: LossConfig = LossConfig()):
    """Return ``(loss, d loss / d logits)`` averaged over known entries."""
    z = np.asarray(logits, dtype=np.float64)
    t, mask = targets_and_mask(targets)
    if z.shape != t.shape:
        raise DimensionError(f"logits {z.shape} and targets {t.shape} differ")
    if not np.all(np.isfinite(z)):
        raise ContractViolation("logits must be finite")
    count = np.count_nonzero(mask)
    if count == 0:
        return 0.0, np.zeros_like(z)

    gp, gm, m = config.gamma_plus, config.gamma_minus, config.margin
    log_p = -np.logaddexp(0.0, -z)
    log_q = -np.logaddexp(0.0, z)  # log(1 - p)
    p, q = np.exp(log_p), np.exp(log_q)

    loss_pos = -_pow(q, gp) * log_p
    grad_pos = gp * _pow(q, gp) * p * log_p - _pow(q, gp + 1)

    if m == 0:
        pm, log_qm, qm = p, log_q, q
        active = np.ones_like(p, dtype=bool)
    else:
        pm = np.maximum(p - m, 0.0)
        qm = 1.0 - pm
        log_qm = np.log1p(-pm)
        active = p > m
    loss_neg = -_pow(pm, gm) * log_qm
    d_neg_d_pm = _pow(pm, gm) / qm
    if gm != 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            d_neg_d_pm = d_neg_d_pm - np.where(pm > 0, gm * pm ** (gm - 1) * log_qm, 0.0)
    grad_neg = np.where(active, d_neg_d_pm * p * q, 0.0)

    per_entry = np.where(mask, t * loss_pos + (1 - t) * loss_neg, 0.0)
    grad = np.where(mask, t * grad_pos + (1 - t) * grad_neg, 0.0) / count
    return float(per_entry.sum() / count), grad
