"""Image-space mixing and whole-sample mixing.

Images are H x W x Ch float arrays with intensities in [0, 1]. The mixed
image is the weight-normalised sum of the inputs; the mixed label vector is
the ternary OR of the inputs' labels.
"""
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ContractViolation, DimensionError, ParseError
from .ternary import LabelVector, mix_label_vectors

LMT_MAGIC = b"LMT1"
_LMT_HEADER = struct.Struct("<4sIII")


def check_image(image, name="image") -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3:
        raise DimensionError(f"{name} must be H x W x Ch, got shape {image.shape}")
    if image.dtype.kind != "f":
        raise ContractViolation(f"{name} must hold floating intensities, got {image.dtype}")
    if image.size and not (np.all(image >= 0.0) and np.all(image <= 1.0)):
        raise ContractViolation(f"{name} intensities must lie in [0, 1]")
    return image


@dataclass(frozen=True, eq=False)
class Sample:
    id: str
    image: np.ndarray
    labels: LabelVector

    def __post_init__(self):
        check_image(self.image)
        if not isinstance(self.labels, LabelVector):
            object.__setattr__(self, "labels", LabelVector(self.labels))

    def same_as(self, other: "Sample") -> bool:
        """Bit-exact equality of id, image and labels."""
        return (self.id == other.id and self.labels == other.labels
                and self.image.dtype == other.image.dtype
                and np.array_equal(self.image, other.image))


def check_weights(weights, k: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) != k:
        raise DimensionError(f"expected {k} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ContractViolation("mix weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise ContractViolation("at least one mix weight must be positive")
    return w


def mix_images(images: Sequence[np.ndarray], weights=None) -> np.ndarray:
    """Weighted mean of K images of identical shape.

    ``weights`` defaults to equal weights. Accumulation is done in float64;
    the result keeps the inputs' floating dtype.
    """
    if len(images) == 0:
        raise ContractViolation("mix_images needs at least one image")
    images = [np.asarray(im) for im in images]
    shape = images[0].shape
    for im in images[1:]:
        if im.shape != shape:
            raise DimensionError(f"image shapes differ: {shape} vs {im.shape}")
    w = check_weights(np.ones(len(images)) if weights is None else weights, len(images))
    out_dtype = np.result_type(*images)
    if out_dtype.kind != "f":
        out_dtype = np.dtype(np.float64)
    acc = np.zeros(shape, dtype=np.float64)
    for wk, im in zip(w, images):
        if wk:
            acc += wk * im.astype(np.float64, copy=False)
    acc /= w.sum()
    # rounding in the normalisation can step a hair outside [0, 1]
    np.clip(acc, 0.0, 1.0, out=acc)
    return acc.astype(out_dtype, copy=False)


def mix_samples(samples: Sequence[Sample]) -> Sample:
    """Equal-weight LogicMix of K samples: mean image, OR-mixed labels."""
    if len(samples) == 0:
        raise ContractViolation("mix_samples needs at least one sample")
    if len(samples) == 1:
        return samples[0]
    image = mix_images([s.image for s in samples])
    labels = mix_label_vectors([s.labels for s in samples])
    return Sample("+".join(s.id for s in samples), image, labels)


def encode_tensor(image) -> bytes:
    image = np.asarray(image)
    if image.ndim != 3:
        raise DimensionError(f"LMT1 tensors are H x W x Ch, got shape {image.shape}")
    h, w, c = image.shape
    body = np.ascontiguousarray(image, dtype="<f4").tobytes()
    return _LMT_HEADER.pack(LMT_MAGIC, h, w, c) + body


def decode_tensor(blob: bytes, source: Optional[str] = None) -> np.ndarray:
    if len(blob) < _LMT_HEADER.size:
        raise ParseError("truncated LMT1 header", path=source)
    magic, h, w, c = _LMT_HEADER.unpack_from(blob)
    if magic != LMT_MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {LMT_MAGIC!r}", path=source)
    expected = h * w * c * 4
    body = blob[_LMT_HEADER.size:]
    if len(body) != expected:
        raise ParseError(f"expected {expected} payload bytes, found {len(body)}", path=source)
    return np.frombuffer(body, dtype="<f4").astype(np.float32).reshape(h, w, c)


def write_tensor(path, image) -> None:
    Path(path).write_bytes(encode_tensor(image))


def read_tensor(path) -> np.ndarray:
    return decode_tensor(Path(path).read_bytes(), source=str(path))
