"""
How much supervision does a mixed sample carry?
===============================================

Dropping 70% of the labels leaves few known positives per image. Mixing K
images collects the known positives of all of them, at the cost of turning
many known negatives into unknowns. This script measures both effects.

Set LOGICMIX_COCO_TRAIN to an instances_train2014.json file to run on COCO;
otherwise a synthetic multi-label dataset with 80 categories is used.
"""
import os

from logicmix.datasets import compute_label_stats, drop_labels, estimate_augmented_stats, ingest_coco
from logicmix.pipeline import LogicMixConfig
from logicmix.trainer import make_synthetic_dataset

path = os.environ.get("LOGICMIX_COCO_TRAIN")
if path:
    full = ingest_coco(path)
else:
    _, full = make_synthetic_dataset(5000, 80, 16, seed=0)
print(f"{len(full)} samples, {full.num_categories} categories")

partial = drop_labels(full, 0.30, seed=0)
base = compute_label_stats(partial)
print(f"30% known:   {base.mean_positives_per_sample:6.2f} positives  "
      f"{base.mean_negatives_per_sample:6.2f} negatives per sample")

for k_min, k_max in [(2, 2), (2, 3), (3, 3), (4, 4)]:
    stats = estimate_augmented_stats(partial, LogicMixConfig(1.0, k_min, k_max), 100_000, seed=0)
    print(f"K in [{k_min},{k_max}]:  {stats.mean_positives_per_sample:6.2f} positives  "
          f"{stats.mean_negatives_per_sample:6.2f} negatives per sample")
