import time
from dataclasses import replace

import numpy as np
import pytest

from logicmix.bench import (BenchConfig, make_corpus, overhead_pct, run_bench_grid,
                            run_epoch, run_throughput_bench, stream_digests)
from logicmix.errors import ContractViolation, HarnessError

SMALL = BenchConfig(samples_per_epoch=128, batch_size=16, image_shape=(8, 8, 3), repetitions=2,
                    step_time=0.0, load_latency=0.0)


def test_streams_identical_across_worker_counts():
    for k in (2, 4):
        digests = stream_digests([1, 2, 4, 8], replace(SMALL, k_fixed=k))
        assert len(set(digests.values())) == 1


def test_stream_depends_on_seed():
    a = stream_digests([1], SMALL)[1]
    b = stream_digests([1], replace(SMALL, seed=1))[1]
    assert a != b


def test_every_sample_is_emitted_once():
    ds = make_corpus(SMALL)
    _, digests = run_epoch(ds, SMALL, baseline=True, epoch=0, record=True)
    assert [i for i, _ in digests] == list(range(SMALL.samples_per_epoch))


def test_disk_corpus_matches_memory_corpus(tmp_path):
    mem = run_throughput_bench(SMALL, baseline=False)
    disk = run_throughput_bench(replace(SMALL, corpus_dir=str(tmp_path)), baseline=False)
    assert mem.stream_digest == disk.stream_digest
    assert len(list(tmp_path.glob("*.lmt"))) == SMALL.samples_per_epoch


class _Broken:
    def __init__(self, ds):
        self.ds = ds

    def __len__(self):
        return len(self.ds)

    def sample(self, i):
        if i == 5:
            raise RuntimeError("disk on fire")
        return self.ds.sample(i)

    def index_of(self, sid):
        return self.ds.index_of(sid)


class _Stuck(_Broken):
    def sample(self, i):
        time.sleep(2.0)
        return self.ds.sample(i)


def test_worker_failure_surfaces():
    with pytest.raises(HarnessError, match="worker failed"):
        run_epoch(_Broken(make_corpus(SMALL)), SMALL, baseline=True, epoch=0)


def test_stalled_workers_time_out():
    cfg = replace(SMALL, timeout=0.3, workers=1)
    with pytest.raises(HarnessError, match="stalled"):
        run_epoch(_Stuck(make_corpus(cfg)), cfg, baseline=True, epoch=0)


def test_config_validation():
    for bad in [dict(workers=0), dict(s=2.0), dict(step_time=-1), dict(consumer="gpu"),
                dict(samples_per_epoch=2, k_fixed=4)]:
        with pytest.raises(ContractViolation):
            BenchConfig(**bad)


def test_report_needs_two_repetitions():
    rep = run_throughput_bench(replace(SMALL, repetitions=1), baseline=True)
    with pytest.raises(ContractViolation):
        rep.sd_epoch_s


# pipeline fill is a fixed per-epoch cost; shorter epochs overstate it
TIMED = BenchConfig(samples_per_epoch=512, repetitions=5)


def test_s_zero_costs_nothing_measurable():
    cfg = replace(TIMED, workers=4)
    ds = make_corpus(cfg)
    base = run_throughput_bench(cfg, baseline=True, dataset=ds)
    zero = run_throughput_bench(replace(cfg, s=0.0), baseline=False, dataset=ds)
    delta = abs(zero.mean_epoch_s - base.mean_epoch_s)
    assert delta <= 2 * np.hypot(base.sd_epoch_s, zero.sd_epoch_s)


def test_overhead_shrinks_with_more_workers():
    table = run_bench_grid([1, 2, 4], [4], replace(TIMED, repetitions=3))
    prev = None
    for w in (1, 2, 4):
        cell, base = table.cells[(w, 4)], table.baselines[w]
        band = 100 * (cell.sd_epoch_s + base.sd_epoch_s) / base.mean_epoch_s
        if prev is not None:
            assert cell.overhead_pct <= prev + band
        prev = cell.overhead_pct
    assert table.cells[(1, 4)].overhead_pct > table.cells[(4, 4)].overhead_pct
    assert "LogicMix(K=4)" in table.format_table()


def test_overhead_pct():
    from logicmix.bench import ThroughputReport
    b = ThroughputReport(1, 4, 1.0, True, [1.0, 1.0], "x")
    r = ThroughputReport(1, 4, 1.0, False, [1.5, 1.5], "y")
    assert overhead_pct(r, b) == 50.0
