import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tiny_dataset
from logicmix.errors import ContractViolation, InsufficientDataset
from logicmix.mixing import mix_samples
from logicmix.pipeline import (LogicMix, LogicMixConfig, MixPlan, apply, draw_plan,
                               plan_from_uniforms, rng_stream)


def test_config_validation():
    for bad in [dict(s=-0.1), dict(s=1.1), dict(k_min=0), dict(k_min=3, k_max=2),
                dict(k_min=2.5), dict(seed=-1)]:
        with pytest.raises(ContractViolation):
            LogicMixConfig(**bad)
    assert LogicMixConfig(k_max=5).draws_per_call == 6


def test_s_zero_never_augments():
    cfg = LogicMixConfig(s=0.0)
    for i in range(100):
        assert draw_plan(cfg, 10, i % 10, rng_stream(0, i)) == MixPlan(False)


def test_only_possible_companion():
    cfg = LogicMixConfig(s=1.0, k_min=2, k_max=2)
    plan = draw_plan(cfg, 2, 0, rng_stream(0))
    assert plan == MixPlan(True, 2, (1,))


def test_insufficient_dataset():
    ds = tiny_dataset(n=1)
    with pytest.raises(InsufficientDataset):
        apply(ds.sample(0), ds, LogicMixConfig(s=1.0, k_min=2, k_max=2), rng_stream(0), index=0)


def test_fixed_draw_budget():
    cfg = LogicMixConfig(s=0.5, k_min=2, k_max=5)
    for i in range(50):
        rng = rng_stream(3, i)
        draw_plan(cfg, 20, i % 20, rng)
        follow = rng.random()
        ref = rng_stream(3, i)
        ref.random(cfg.draws_per_call)
        assert follow == ref.random()


@settings(max_examples=300)
@given(st.integers(2, 40), st.integers(1, 6), st.integers(0, 6), st.data())
def test_companions_distinct_and_exclude_input(n, k_min, extra, data):
    k_max = min(k_min + extra, n)
    k_min = min(k_min, k_max)
    idx = data.draw(st.integers(0, n - 1))
    u = np.array(data.draw(st.lists(st.floats(0, 1, exclude_max=True), min_size=k_max + 1,
                                    max_size=k_max + 1)))
    u[0] = 0.0
    plan = plan_from_uniforms(LogicMixConfig(1.0, k_min, k_max), n, idx, u)
    assert plan.augment and k_min <= plan.k <= k_max
    comps = plan.companion_indices
    assert len(comps) == plan.k - 1 == len(set(comps))
    assert idx not in comps and all(0 <= c < n for c in comps)


def test_companions_are_uniform():
    cfg = LogicMixConfig(s=1.0, k_min=2, k_max=2)
    counts = np.zeros(5)
    for t in range(20000):
        counts[draw_plan(cfg, 5, 2, rng_stream(1, t)).companion_indices[0]] += 1
    assert counts[2] == 0
    expected = 20000 / 4
    assert np.all(np.abs(counts[[0, 1, 3, 4]] - expected) < 4 * np.sqrt(expected * 0.75))


def test_s_zero_is_bit_identical_passthrough(dataset):
    pipe = LogicMix(LogicMixConfig(s=0.0))
    for i in range(len(dataset)):
        assert pipe(dataset, i).same_as(dataset.sample(i))


def test_two_sample_output_equals_direct_mix():
    ds = tiny_dataset(n=2)
    out = LogicMix(LogicMixConfig(s=1.0, k_min=2, k_max=2))(ds, 0)
    assert out.same_as(mix_samples([ds.sample(0), ds.sample(1)]))


def test_deterministic_per_stream(dataset):
    pipe = LogicMix(LogicMixConfig(s=0.5, seed=11))
    a = [pipe(dataset, i, epoch=3) for i in range(len(dataset))]
    b = [pipe(dataset, i, epoch=3) for i in reversed(range(len(dataset)))][::-1]
    assert all(x.same_as(y) for x, y in zip(a, b))


def test_pre_transform_runs_on_every_participant(dataset):
    seen = []

    def flip(s):
        seen.append(s.id)
        return type(s)(s.id, 1.0 - s.image, s.labels)

    pipe = LogicMix(LogicMixConfig(s=1.0, k_min=3, k_max=3), pre_transform=flip)
    out = pipe(dataset, 0)
    assert out.id.split("+") == seen and len(seen) == 3
    pipe0 = LogicMix(LogicMixConfig(s=0.0), pre_transform=flip)
    seen.clear()
    assert pipe0(dataset, 0).same_as(dataset.sample(0)) and not seen


def test_apply_looks_up_index_by_id(dataset):
    cfg = LogicMixConfig(s=1.0)
    a = apply(dataset.sample(4), dataset, cfg, rng_stream(0, 9))
    b = apply(dataset.sample(4), dataset, cfg, rng_stream(0, 9), index=4)
    assert a.same_as(b)


def test_rng_stream_rejects_negative_keys():
    with pytest.raises(ContractViolation):
        rng_stream(0, -1)
