"""Three-valued labels {0, 1, ?} and the logical-OR mix over them.

Labels are stored as int8 codes: 1 positive, 0 negative, -1 unknown.
OR over unknowns is resolved by the domination law (q or 1 = 1) and the
identity law (q or 0 = q), which hold whatever value the unknown q has.
"""
from enum import IntEnum
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation, DimensionError, EnumerationTooLarge

POSITIVE_CODE = 1
NEGATIVE_CODE = 0
UNKNOWN_CODE = -1

MAX_ENUMERATED_UNKNOWNS = 20


class TernaryLabel(IntEnum):
    NEGATIVE = NEGATIVE_CODE
    POSITIVE = POSITIVE_CODE
    UNKNOWN = UNKNOWN_CODE

    @classmethod
    def coerce(cls, value) -> "TernaryLabel":
        """Accept a TernaryLabel, 0/1/-1, None (unknown), True/False or '?'."""
        if isinstance(value, TernaryLabel):
            return value
        if value is None or value == "?":
            return cls.UNKNOWN
        if isinstance(value, (bool, np.bool_)):
            return cls.POSITIVE if value else cls.NEGATIVE
        if isinstance(value, str) and value in ("0", "1"):
            return cls(int(value))
        if isinstance(value, (int, np.integer)) and int(value) in (-1, 0, 1):
            return cls(int(value))
        raise ContractViolation(f"not a ternary label: {value!r}")

    def to_json(self):
        return None if self is TernaryLabel.UNKNOWN else int(self)

    def __str__(self):
        return "?" if self is TernaryLabel.UNKNOWN else str(int(self))


def _validate_codes(codes: np.ndarray) -> np.ndarray:
    bad = (codes != POSITIVE_CODE) & (codes != NEGATIVE_CODE) & (codes != UNKNOWN_CODE)
    if bad.any():
        raise ContractViolation(f"label codes must be in {{-1, 0, 1}}, got {codes[bad][:5]}")
    return codes


def as_codes(vector) -> np.ndarray:
    """Return the int8 code array behind a LabelVector or label-like sequence."""
    if isinstance(vector, LabelVector):
        return vector.codes
    if isinstance(vector, np.ndarray) and vector.dtype.kind in "iu":
        return _validate_codes(vector).astype(np.int8, copy=False)
    if isinstance(vector, np.ndarray) and vector.dtype.kind == "b":
        return vector.astype(np.int8)
    return np.array([TernaryLabel.coerce(v) for v in vector], dtype=np.int8)


class LabelVector:
    """Immutable length-C vector of ternary labels."""

    __slots__ = ("_codes",)

    def __init__(self, labels: Iterable):
        codes = np.array(as_codes(labels), dtype=np.int8)
        if codes.ndim != 1:
            raise DimensionError(f"label vector must be 1-D, got shape {codes.shape}")
        codes.setflags(write=False)
        self._codes = codes

    @classmethod
    def parse(cls, text: str) -> "LabelVector":
        """Build from a compact string such as ``"10?"`` (whitespace and commas ignored)."""
        return cls([c for c in text if c not in " ,[]"])

    @classmethod
    def from_json(cls, values: Sequence) -> "LabelVector":
        return cls([TernaryLabel.UNKNOWN if v is None else v for v in values])

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    def to_json(self) -> list:
        return [None if c == UNKNOWN_CODE else int(c) for c in self._codes]

    def count(self, label) -> int:
        return int(np.count_nonzero(self._codes == int(TernaryLabel.coerce(label))))

    def __len__(self):
        return len(self._codes)

    def __iter__(self):
        return (TernaryLabel(int(c)) for c in self._codes)

    def __getitem__(self, i) -> TernaryLabel:
        return TernaryLabel(int(self._codes[i]))

    def __eq__(self, other):
        if not isinstance(other, LabelVector):
            return NotImplemented
        return np.array_equal(self._codes, other._codes)

    def __hash__(self):
        return hash(self._codes.tobytes())

    def __str__(self):
        return "".join(str(lab) for lab in self)

    def __repr__(self):
        return "LabelVector([" + ",".join(str(lab) for lab in self) + "])"


def or_reduce(labels: Sequence) -> TernaryLabel:
    """OR of K >= 1 ternary labels.

    Positive if any input is positive, negative if all are negative,
    unknown otherwise.

    >>> or_reduce([TernaryLabel.POSITIVE, TernaryLabel.UNKNOWN])
    <TernaryLabel.POSITIVE: 1>
    >>> or_reduce([TernaryLabel.UNKNOWN, TernaryLabel.NEGATIVE])
    <TernaryLabel.UNKNOWN: -1>
    """
    labels = [TernaryLabel.coerce(v) for v in labels]
    if not labels:
        raise ContractViolation("or_reduce needs at least one label")
    if TernaryLabel.POSITIVE in labels:
        return TernaryLabel.POSITIVE
    if all(v is TernaryLabel.NEGATIVE for v in labels):
        return TernaryLabel.NEGATIVE
    return TernaryLabel.UNKNOWN


def mix_codes(codes: np.ndarray, axis: int = 0) -> np.ndarray:
    """Vectorised OR-mix of stacked code arrays along ``axis``."""
    codes = np.asarray(codes)
    if codes.shape[axis] == 0:
        raise ContractViolation("cannot mix an empty set of label vectors")
    any_pos = (codes == POSITIVE_CODE).any(axis=axis)
    all_neg = (codes == NEGATIVE_CODE).all(axis=axis)
    out = np.full(any_pos.shape, UNKNOWN_CODE, dtype=np.int8)
    out[all_neg] = NEGATIVE_CODE
    out[any_pos] = POSITIVE_CODE
    return out


def mix_label_vectors(vectors: Sequence) -> LabelVector:
    """Element-wise OR of K >= 1 label vectors of equal length."""
    if len(vectors) == 0:
        raise ContractViolation("mix_label_vectors needs at least one vector")
    stacked = [as_codes(v) for v in vectors]
    lengths = {len(v) for v in stacked}
    if len(lengths) != 1:
        raise DimensionError(f"label vectors differ in length: {sorted(lengths)}")
    return LabelVector(mix_codes(np.stack(stacked)))


def enumerate_completions(vector) -> set:
    """All binary vectors obtained by filling each unknown with 0 or 1.

    Test oracle only; refuses vectors with more than 20 unknowns.
    """
    codes = as_codes(vector)
    unknown = np.flatnonzero(codes == UNKNOWN_CODE)
    if len(unknown) > MAX_ENUMERATED_UNKNOWNS:
        raise EnumerationTooLarge(
            f"{len(unknown)} unknowns exceeds the enumeration bound of {MAX_ENUMERATED_UNKNOWNS}")
    base = [int(c) for c in codes]
    completions = set()
    for fill in product((0, 1), repeat=len(unknown)):
        for pos, bit in zip(unknown, fill):
            base[pos] = bit
        completions.add(tuple(base))
    return completions
