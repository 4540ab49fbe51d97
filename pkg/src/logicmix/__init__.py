"""LogicMix: multi-sample Mixup for partially labeled multi-label data."""
from .curriculum import CurriculumConfig, EpochView, PseudoLabelSet, compose_epoch_view, generate_pseudo_labels
from .datasets import (CategoryTable, LabelStats, PartialDataset, compute_label_stats, drop_labels,
                       estimate_augmented_stats, ingest_coco, read_labels_jsonl, write_labels_jsonl)
from .errors import (ContractViolation, DimensionError, EnumerationTooLarge, HarnessError,
                     IngestionError, InsufficientDataset, LogicMixError, ParseError)
from .loss import LossConfig, masked_asymmetric_loss
from .metrics import Metrics, average_precision, mean_ap
from .mixing import Sample, mix_images, mix_samples, read_tensor, write_tensor
from .pipeline import LogicMix, LogicMixConfig, MixPlan, apply, draw_plan
from .ternary import LabelVector, TernaryLabel, enumerate_completions, mix_codes, mix_label_vectors, or_reduce
from .variants import Variant, VariantConfig, assume_negative, ml_mixup, mixup_an, mixup_pme, wang_mix

__version__ = "0.1.0"
