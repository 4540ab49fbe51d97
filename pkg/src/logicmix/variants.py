"""Two-sample Mixup baselines adapted to partial labels.

Soft label vectors are float arrays with NaN marking an unknown entry.
Every variant mixes images through :func:`mixing.mix_images` with weights
``(lam, 1 - lam)``.
"""
import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolation, DimensionError
from .mixing import Sample, mix_images
from .ternary import NEGATIVE_CODE, UNKNOWN_CODE, LabelVector, as_codes


class Variant(str, enum.Enum):
    MIXUP_AN = "mixup-an"
    WANG_AN = "wang"
    ML_MIXUP_AN = "ml-mixup"
    MIXUP_PME = "pme"
    LOGICMIX = "logicmix"
    NO_AUGMENT = "none"

    @property
    def soft_targets(self) -> bool:
        return self in (Variant.MIXUP_AN, Variant.MIXUP_PME)


DEFAULT_ALPHA = {Variant.MIXUP_AN: 0.2, Variant.MIXUP_PME: 0.75}


@dataclass(frozen=True)
class VariantConfig:
    variant: Variant = Variant.NO_AUGMENT
    alpha: Optional[float] = None
    seed: int = 0
    # Wang et al. alternation phase: mixing on even epochs when True
    wang_even_epochs: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.alpha is None:
            object.__setattr__(self, "alpha", DEFAULT_ALPHA.get(self.variant))
        if self.variant is Variant.MIXUP_AN and not self.alpha > 0:
            raise ContractViolation("Mixup-AN needs alpha > 0")
        if self.variant is Variant.MIXUP_PME and not 0 <= self.alpha < 1:
            raise ContractViolation("Mixup-PME needs 0 <= alpha < 1")


def assume_negative(vector) -> LabelVector:
    codes = as_codes(vector)
    return LabelVector(np.where(codes == UNKNOWN_CODE, NEGATIVE_CODE, codes).astype(np.int8))


def unknown_as_half(vector) -> np.ndarray:
    codes = as_codes(vector)
    return np.where(codes == UNKNOWN_CODE, 0.5, codes).astype(np.float64)


def sample_beta(alpha: float, rng: np.random.Generator) -> float:
    """Beta(alpha, alpha) from the ratio of two Gamma(alpha, 1) draws."""
    g1 = rng.standard_gamma(alpha)
    g2 = rng.standard_gamma(alpha)
    total = g1 + g2
    if total == 0.0:
        # both gammas underflowed (tiny alpha); the limit is a fair 0/1 coin
        return float(rng.random() < 0.5)
    return float(g1 / total)


def _pair(a: Sample, b: Sample):
    if a.image.shape != b.image.shape:
        raise DimensionError(f"image shapes differ: {a.image.shape} vs {b.image.shape}")
    if len(a.labels) != len(b.labels):
        raise DimensionError("label vectors differ in length")


def _hard_or(a: Sample, b: Sample) -> LabelVector:
    ya = assume_negative(a.labels).codes
    yb = assume_negative(b.labels).codes
    return LabelVector(np.maximum(ya, yb))


def mixup_an(a: Sample, b: Sample, alpha: float, rng: np.random.Generator,
             lam: Optional[float] = None):
    """Mixup after assume-negative: returns (image, soft labels)."""
    _pair(a, b)
    if lam is None:
        if not alpha > 0:
            raise ContractViolation("alpha must be positive")
        lam = sample_beta(alpha, rng)
    image = mix_images([a.image, b.image], [lam, 1.0 - lam])
    ya = assume_negative(a.labels).codes.astype(np.float64)
    yb = assume_negative(b.labels).codes.astype(np.float64)
    return image, np.clip(lam * ya + (1.0 - lam) * yb, 0.0, 1.0)


def wang_enabled(epoch: int, even_epochs: bool = True) -> bool:
    return (epoch % 2 == 0) == even_epochs


def wang_mix(a: Sample, b: Sample, epoch: int, even_epochs: bool = True) -> Sample:
    """Half-half image mix with OR of assume-negative labels, on alternate epochs only."""
    _pair(a, b)
    if not wang_enabled(epoch, even_epochs):
        return a
    image = mix_images([a.image, b.image], [0.5, 0.5])
    return Sample(f"{a.id}+{b.id}", image, _hard_or(a, b))


def ml_mixup(a: Sample, b: Sample, rng: np.random.Generator,
             lam: Optional[float] = None) -> Sample:
    _pair(a, b)
    if lam is None:
        lam = float(rng.random())
    image = mix_images([a.image, b.image], [lam, 1.0 - lam])
    return Sample(f"{a.id}+{b.id}", image, _hard_or(a, b))


def mixup_pme(a: Sample, b: Sample, alpha: float, rng: np.random.Generator,
              lam: Optional[float] = None):
    """Mixup-PME: unknowns count as 0.5, and stay unknown where the first sample's are.

    The gating looks at ``a`` only, so the operation is not symmetric.
    """
    _pair(a, b)
    if lam is None:
        if not 0 <= alpha < 1:
            raise ContractViolation("alpha must lie in [0, 1)")
        lam = float(rng.uniform(alpha, 1.0))
    image = mix_images([a.image, b.image], [lam, 1.0 - lam])
    soft = lam * unknown_as_half(a.labels) + (1.0 - lam) * unknown_as_half(b.labels)
    soft = np.clip(soft, 0.0, 1.0)
    soft[as_codes(a.labels) == UNKNOWN_CODE] = np.nan
    return image, soft


def soft_to_display(soft) -> list:
    return [None if np.isnan(v) else float(v) for v in soft]

