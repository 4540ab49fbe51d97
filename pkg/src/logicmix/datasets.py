"""Partially labeled datasets: model, JSONL codec, COCO ingestion, label
dropping and label-count statistics."""
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ContractViolation, DimensionError, IngestionError, ParseError
from .mixing import Sample, read_tensor
from .pipeline import LogicMixConfig, plan_from_uniforms, rng_stream, _check_draw_args
from .ternary import (NEGATIVE_CODE, POSITIVE_CODE, UNKNOWN_CODE, LabelVector, as_codes,
                      mix_codes)

_LINE_KEYS = {"id", "image", "labels", "ground_truth"}


@dataclass(frozen=True)
class CategoryTable:
    names: tuple
    source_ids: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if len(set(self.names)) != len(self.names):
            raise ContractViolation("category names must be unique")
        if self.source_ids is not None:
            object.__setattr__(self, "source_ids", tuple(int(i) for i in self.source_ids))
            if len(self.source_ids) != len(self.names):
                raise DimensionError("source_ids and names differ in length")

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class PartialDataset:
    """Samples with ternary labels, stored as an N x C int8 code matrix.

    Images are referenced, not loaded: either held in memory (``images``)
    or read on demand from ``image_root / image_refs[i]``.
    """

    def __init__(self, categories, ids: Sequence[str], labels, image_refs=None,
                 ground_truth=None, images=None, image_root=None):
        if not isinstance(categories, CategoryTable):
            categories = CategoryTable(tuple(categories))
        self.categories = categories
        self.ids = [str(i) for i in ids]
        n, c = len(self.ids), len(categories)
        if isinstance(labels, np.ndarray):
            codes = np.array(as_codes(labels.ravel()), dtype=np.int8).reshape(labels.shape)
        else:
            codes = np.array([as_codes(row) for row in labels], dtype=np.int8)
        if codes.size == 0:
            codes = codes.reshape(n, c)
        if codes.shape != (n, c):
            raise DimensionError(f"labels have shape {codes.shape}, expected ({n}, {c})")
        self.labels = _frozen(codes)
        self.image_refs = list(image_refs) if image_refs is not None else [None] * n
        if len(self.image_refs) != n:
            raise DimensionError("image_refs length differs from sample count")
        if ground_truth is not None:
            gt = np.array(ground_truth, dtype=np.int8)
            if gt.shape != (n, c):
                raise DimensionError(f"ground truth has shape {gt.shape}, expected ({n}, {c})")
            if np.any((gt != 0) & (gt != 1)):
                raise ContractViolation("ground truth must be binary")
            known = codes != UNKNOWN_CODE
            if np.any(codes[known] != gt[known]):
                raise ContractViolation("a known label disagrees with the ground truth")
            ground_truth = _frozen(gt)
        self.ground_truth = ground_truth
        if images is not None and len(images) != n:
            raise DimensionError("images length differs from sample count")
        self.images = images
        self.image_root = Path(image_root) if image_root is not None else None
        self._index = None

    @property
    def num_categories(self) -> int:
        return len(self.categories)

    def __len__(self):
        return len(self.ids)

    def index_of(self, sample_id: str) -> int:
        if self._index is None:
            self._index = {sid: i for i, sid in enumerate(self.ids)}
            if len(self._index) != len(self.ids):
                raise ContractViolation("sample ids are not unique")
        try:
            return self._index[sample_id]
        except KeyError:
            raise KeyError(f"no sample with id {sample_id!r}") from None

    def label_vector(self, i: int) -> LabelVector:
        return LabelVector(self.labels[i])

    def load_image(self, i: int) -> np.ndarray:
        if self.images is not None:
            return self.images[i]
        ref = self.image_refs[i]
        if ref is None:
            raise ContractViolation(f"sample {self.ids[i]!r} has no image")
        path = self.image_root / ref if self.image_root is not None else Path(ref)
        return load_image_file(path)

    def sample(self, i: int) -> Sample:
        return Sample(self.ids[i], self.load_image(i), LabelVector(self.labels[i]))

    def replace_labels(self, labels) -> "PartialDataset":
        """Same samples and images with a different label matrix (ground truth dropped)."""
        return PartialDataset(self.categories, self.ids, np.asarray(labels), self.image_refs,
                              images=self.images, image_root=self.image_root)

    def structurally_equal(self, other: "PartialDataset") -> bool:
        gt_equal = (self.ground_truth is None and other.ground_truth is None) or (
            self.ground_truth is not None and other.ground_truth is not None
            and np.array_equal(self.ground_truth, other.ground_truth))
        return (self.categories == other.categories and self.ids == other.ids
                and self.image_refs == other.image_refs
                and np.array_equal(self.labels, other.labels) and gt_equal)

    def __repr__(self):
        return f"PartialDataset(n={len(self)}, C={self.num_categories})"


def load_image_file(path) -> np.ndarray:
    """Read an LMT1 tensor or a PNG/JPEG image as float32 in [0, 1]."""
    path = Path(path)
    if path.suffix.lower() in (".lmt", ".lmt1"):
        return read_tensor(path)
    from PIL import Image

    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB") if im.mode not in ("L", "RGB") else im)
    arr = arr.astype(np.float32) / 255.0
    return arr[:, :, None] if arr.ndim == 2 else arr


# -- JSONL codec -----------------------------------------------------------

def _label_from_json(v, lineno, path):
    if v is None:
        return UNKNOWN_CODE
    if isinstance(v, bool) or not isinstance(v, int) or v not in (0, 1):
        raise ParseError(f"label value {v!r} is not 1, 0 or null", line=lineno, path=path)
    return v


def write_labels_jsonl(dataset: PartialDataset, path) -> None:
    header = {"categories": list(dataset.categories.names)}
    if dataset.categories.source_ids is not None:
        header["source_ids"] = list(dataset.categories.source_ids)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header) + "\n")
        for i, sid in enumerate(dataset.ids):
            row = {"id": sid, "image": dataset.image_refs[i],
                   "labels": LabelVector(dataset.labels[i]).to_json()}
            if dataset.ground_truth is not None:
                row["ground_truth"] = [int(v) for v in dataset.ground_truth[i]]
            f.write(json.dumps(row) + "\n")


def read_labels_jsonl(path, image_root=None) -> PartialDataset:
    path = str(path)
    with open(path, encoding="utf-8") as f:
        lines = [ln for ln in f]
    if not lines:
        raise ParseError("empty label file", line=1, path=path)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", line=1, path=path) from None
    if not isinstance(header, dict) or not isinstance(header.get("categories"), list):
        raise ParseError("first line must be a header object with a 'categories' list",
                         line=1, path=path)
    if set(header) - {"categories", "source_ids"}:
        raise ParseError(f"unknown header fields {sorted(set(header) - {'categories', 'source_ids'})}",
                         line=1, path=path)
    try:
        categories = CategoryTable(tuple(header["categories"]), header.get("source_ids"))
    except (ContractViolation, DimensionError, TypeError, ValueError) as e:
        raise ParseError(f"bad header: {e}", line=1, path=path) from None
    c = len(categories)
    ids, refs, rows, gts = [], [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"malformed JSON: {e.msg}", line=lineno, path=path) from None
        if not isinstance(obj, dict):
            raise ParseError("each sample line must be a JSON object", line=lineno, path=path)
        extra = set(obj) - _LINE_KEYS
        if extra:
            raise ParseError(f"unknown fields {sorted(extra)}", line=lineno, path=path)
        sid, ref, labels = obj.get("id"), obj.get("image"), obj.get("labels")
        if not isinstance(sid, str):
            raise ParseError("'id' must be a string", line=lineno, path=path)
        if ref is not None and not isinstance(ref, str):
            raise ParseError("'image' must be a string or null", line=lineno, path=path)
        if not isinstance(labels, list):
            raise ParseError("'labels' must be a list", line=lineno, path=path)
        if len(labels) != c:
            raise ParseError(f"expected {c} labels, found {len(labels)}", line=lineno, path=path)
        rows.append([_label_from_json(v, lineno, path) for v in labels])
        if "ground_truth" in obj:
            gt = obj["ground_truth"]
            if not isinstance(gt, list) or len(gt) != c or any(
                    isinstance(v, bool) or v not in (0, 1) for v in gt):
                raise ParseError("'ground_truth' must be a list of C binary values",
                                 line=lineno, path=path)
            gts.append(gt)
        ids.append(sid)
        refs.append(ref)
    if gts and len(gts) != len(ids):
        raise ParseError("ground_truth must be present on every line or none", path=path)
    labels = np.array(rows, dtype=np.int8).reshape(len(ids), c)
    try:
        return PartialDataset(categories, ids, labels, refs, ground_truth=gts or None,
                              image_root=image_root)
    except ContractViolation as e:
        raise ParseError(str(e), path=path) from None


# -- COCO -------------------------------------------------------------------

def ingest_coco(annotation_json_path) -> PartialDataset:
    """Fully labeled dataset from a COCO instances file.

    A category is positive for an image iff at least one annotation of that
    category references the image. Categories are ordered by ascending id.
    """
    try:
        with open(annotation_json_path, encoding="utf-8") as f:
            coco = json.load(f)
    except json.JSONDecodeError as e:
        raise IngestionError(f"not valid JSON: {e}") from None
    if not isinstance(coco, dict):
        raise IngestionError("COCO annotation root must be an object")
    for key in ("images", "annotations", "categories"):
        if not isinstance(coco.get(key), list):
            raise IngestionError(f"missing or non-list key {key!r}")
    try:
        cats = sorted(coco["categories"], key=lambda c: int(c["id"]))
        cat_index = {int(c["id"]): k for k, c in enumerate(cats)}
        table = CategoryTable(tuple(c["name"] for c in cats), tuple(cat_index))
        img_index = {int(im["id"]): i for i, im in enumerate(coco["images"])}
        ids = [str(im["id"]) for im in coco["images"]]
        refs = [im["file_name"] for im in coco["images"]]
    except (KeyError, TypeError, ValueError) as e:
        raise IngestionError(f"malformed COCO entry: {e!r}") from None
    labels = np.full((len(ids), len(table)), NEGATIVE_CODE, dtype=np.int8)
    for ann in coco["annotations"]:
        try:
            i = img_index[int(ann["image_id"])]
            k = cat_index[int(ann["category_id"])]
        except KeyError as e:
            raise IngestionError(f"annotation {ann.get('id')!r} references unknown id {e}") from None
        except (TypeError, ValueError) as e:
            raise IngestionError(f"malformed annotation: {e!r}") from None
        labels[i, k] = POSITIVE_CODE
    return PartialDataset(table, ids, labels, refs)


# -- label dropping and statistics -------------------------------------------

def drop_labels(dataset: PartialDataset, proportion: float, seed: int) -> PartialDataset:
    """Keep each known label independently with probability ``proportion``.

    Dropped labels become unknown. The source labels are kept as the result's
    ground truth when they are fully known (or the source already had one).
    """
    if not (isinstance(proportion, (int, float)) and 0.0 < proportion <= 1.0):
        raise ContractViolation(f"proportion must lie in (0, 1], got {proportion!r}")
    rng = rng_stream(seed)
    keep = rng.random(dataset.labels.shape) < proportion
    labels = np.where(keep, dataset.labels, UNKNOWN_CODE).astype(np.int8)
    gt = dataset.ground_truth
    if gt is None and not np.any(dataset.labels == UNKNOWN_CODE):
        gt = dataset.labels
    return PartialDataset(dataset.categories, dataset.ids, labels, dataset.image_refs,
                          ground_truth=gt, images=dataset.images, image_root=dataset.image_root)


@dataclass(frozen=True)
class LabelStats:
    mean_positives_per_sample: float
    mean_negatives_per_sample: float
    mean_unknowns_per_sample: float
    known_fraction: float
    num_categories: int = field(default=0, compare=False)

    def __post_init__(self):
        c = self.num_categories
        total = (self.mean_positives_per_sample + self.mean_negatives_per_sample
                 + self.mean_unknowns_per_sample)
        if c and abs(total - c) > 1e-9:
            raise ContractViolation(f"label means sum to {total}, expected C={c}")
        if not 0.0 <= self.known_fraction <= 1.0:
            raise ContractViolation("known_fraction must lie in [0, 1]")

    @classmethod
    def from_codes(cls, codes: np.ndarray) -> "LabelStats":
        codes = np.asarray(codes)
        if codes.ndim != 2 or codes.shape[0] == 0:
            raise ContractViolation("statistics need a nonempty N x C label matrix")
        n, c = codes.shape
        pos = np.count_nonzero(codes == POSITIVE_CODE) / n
        neg = np.count_nonzero(codes == NEGATIVE_CODE) / n
        unk = c - pos - neg
        return cls(pos, neg, unk, (pos + neg) / c if c else 0.0, c)

    def as_dict(self) -> dict:
        return {"mean_positives_per_sample": self.mean_positives_per_sample,
                "mean_negatives_per_sample": self.mean_negatives_per_sample,
                "mean_unknowns_per_sample": self.mean_unknowns_per_sample,
                "known_fraction": self.known_fraction,
                "num_categories": self.num_categories}


def compute_label_stats(dataset: PartialDataset) -> LabelStats:
    if len(dataset) == 0:
        raise ContractViolation("cannot compute statistics of an empty dataset")
    return LabelStats.from_codes(dataset.labels)


def _weighted_stats(parts) -> LabelStats:
    """Merge (count, LabelStats) pairs by weighted average."""
    total = sum(n for n, _ in parts)
    c = parts[0][1].num_categories
    pos = sum(n * s.mean_positives_per_sample for n, s in parts) / total
    neg = sum(n * s.mean_negatives_per_sample for n, s in parts) / total
    return LabelStats(pos, neg, c - pos - neg, (pos + neg) / c, c)


def estimate_augmented_stats(dataset: PartialDataset, config: LogicMixConfig, n_draws: int,
                             seed: int, exhaustive: bool = False) -> LabelStats:
    """Mean label counts of LogicMix outputs with s = 1.

    Monte Carlo over ``n_draws`` augmented samples (uniform input index,
    plans drawn exactly as the pipeline draws them). With ``exhaustive``
    every input, every K and every companion set is enumerated with equal
    weight instead; only practical for tiny datasets.
    """
    if config.s != 1:
        raise ContractViolation("augmented statistics are defined for s = 1")
    if n_draws < 1:
        raise ContractViolation("n_draws must be at least 1")
    n = len(dataset)
    _check_draw_args(config, n, 0)
    codes = dataset.labels
    if exhaustive:
        return _exhaustive_stats(codes, config)
    rng = rng_stream(seed)
    inputs = rng.integers(0, n, size=n_draws)
    uniforms = rng.random((n_draws, config.draws_per_call))
    groups = {}
    for idx, u in zip(inputs, uniforms):
        plan = plan_from_uniforms(config, n, int(idx), u)
        groups.setdefault(plan.k, []).append((int(idx),) + plan.companion_indices)
    parts = []
    for k, rows in groups.items():
        mixed = mix_codes(codes[np.array(rows)], axis=1)
        parts.append((len(rows), LabelStats.from_codes(mixed)))
    return _weighted_stats(parts)


def _exhaustive_stats(codes, config) -> LabelStats:
    n = len(codes)
    per_k = []
    for k in range(config.k_min, config.k_max + 1):
        per_input = []
        if math.comb(n - 1, k - 1) > 10**6:
            raise ContractViolation("dataset too large for exhaustive enumeration")
        for i in range(n):
            others = [j for j in range(n) if j != i]
            rows = [(i,) + comp for comp in combinations(others, k - 1)]
            per_input.append((1, LabelStats.from_codes(mix_codes(codes[np.array(rows)], axis=1))))
        per_k.append((1, _weighted_stats(per_input)))
    return _weighted_stats(per_k)
