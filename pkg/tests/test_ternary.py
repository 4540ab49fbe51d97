from functools import reduce
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logicmix.errors import ContractViolation, DimensionError, EnumerationTooLarge
from logicmix.ternary import (LabelVector, TernaryLabel, as_codes, enumerate_completions,
                              mix_codes, mix_label_vectors, or_reduce)

P, N, U = TernaryLabel.POSITIVE, TernaryLabel.NEGATIVE, TernaryLabel.UNKNOWN
ternary = st.sampled_from([P, N, U])


def oracle_or(labels):
    # resolve by brute force: known iff every completion gives the same binary OR
    outcomes = {max(c) for c in product(*[(0, 1) if l is U else (int(l),) for l in labels])}
    return TernaryLabel(outcomes.pop()) if len(outcomes) == 1 else U


@pytest.mark.parametrize("labels, expected", [
    ([P, U], P), ([U, N], U), ([U, U], U), ([N, N, N], N),
    ([U, P], P), ([N, U], U), ([P, N], P), ([N, P], P), ([P, P], P), ([N, N], N),
])
def test_or_reduce_examples(labels, expected):
    assert or_reduce(labels) is expected


def test_or_reduce_rejects_empty():
    with pytest.raises(ContractViolation):
        or_reduce([])


@given(st.lists(ternary, min_size=1, max_size=6))
def test_or_reduce_matches_completion_oracle(labels):
    assert or_reduce(labels) is oracle_or(labels)


@given(st.lists(ternary, min_size=1, max_size=6), st.randoms())
def test_or_reduce_commutative_and_associative(labels, rnd):
    shuffled = list(labels)
    rnd.shuffle(shuffled)
    assert or_reduce(shuffled) is or_reduce(labels)
    left = reduce(lambda a, b: or_reduce([a, b]), labels)
    right = reduce(lambda a, b: or_reduce([b, a]), reversed(labels))
    assert left is right is or_reduce(labels)


@given(st.lists(st.lists(ternary, min_size=3, max_size=3), min_size=1, max_size=4),
       st.lists(ternary, min_size=3, max_size=3))
def test_mixing_is_monotone_in_positives(vectors, extra):
    before = mix_label_vectors([LabelVector(v) for v in vectors])
    after = mix_label_vectors([LabelVector(v) for v in vectors + [extra]])
    assert np.all(after.codes[before.codes == 1] == 1)


def test_mix_label_vectors_examples():
    assert mix_label_vectors([LabelVector.parse("10?"), LabelVector.parse("?00")]) == \
        LabelVector.parse("10?")
    assert mix_label_vectors([LabelVector.parse("1?"), LabelVector.parse("?0"),
                              LabelVector.parse("00")]) == LabelVector.parse("1?")
    y = LabelVector.parse("?10")
    assert mix_label_vectors([y]) == y


def test_mix_label_vectors_checks_lengths():
    with pytest.raises(DimensionError):
        mix_label_vectors([LabelVector.parse("10"), LabelVector.parse("1")])
    with pytest.raises(ContractViolation):
        mix_label_vectors([])


def test_mix_codes_along_axis():
    codes = np.array([[1, 0, -1], [-1, 0, 0]], dtype=np.int8)
    assert mix_codes(codes, axis=0).tolist() == [1, 0, -1]
    assert mix_codes(codes, axis=1).tolist() == [1, -1]


def test_enumerate_completions_examples():
    assert enumerate_completions(LabelVector.parse("?1")) == {(0, 1), (1, 1)}
    assert enumerate_completions(LabelVector.parse("00")) == {(0, 0)}
    assert enumerate_completions(LabelVector.parse("??")) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_enumerate_completions_refuses_huge_inputs():
    with pytest.raises(EnumerationTooLarge):
        enumerate_completions(LabelVector([-1] * 21))


def test_label_vector_codecs():
    y = LabelVector.from_json([1, None, 0])
    assert list(y) == [P, U, N]
    assert y.to_json() == [1, None, 0]
    assert str(y) == "1?0"
    assert LabelVector.parse("1?0") == y
    assert y.count(U) == 1 and y.count(P) == 1
    assert hash(y) == hash(LabelVector.parse("1?0"))


def test_label_vector_is_immutable():
    y = LabelVector.parse("10")
    with pytest.raises(ValueError):
        y.codes[0] = 0


@pytest.mark.parametrize("bad", [[2], [0.5], ["x"], [[1, 0]]])
def test_invalid_codes_are_rejected(bad):
    with pytest.raises((ContractViolation, DimensionError)):
        as_codes(bad)


def test_ternary_label_coercion():
    assert TernaryLabel.coerce(None) is U
    assert TernaryLabel.coerce("?") is U
    assert TernaryLabel.coerce(1) is P
    assert TernaryLabel.coerce(True) is P
    with pytest.raises(ContractViolation):
        TernaryLabel.coerce(3)
    assert U.to_json() is None and P.to_json() == 1
