"""Worker-pool throughput harness.

A pool of producer threads builds batches (plain loads for the baseline,
LogicMix outputs otherwise) into a bounded queue; one consumer drains it
and spends a fixed simulated device time per batch. Each image load waits
``load_latency`` seconds to stand in for disk I/O and decode, so LogicMix's
extra K - 1 loads per sample cost time that more workers can hide.
"""
import hashlib
import queue
import tempfile
import threading
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .datasets import PartialDataset
from .errors import ContractViolation, HarnessError
from .mixing import write_tensor
from .pipeline import LogicMixConfig, apply, rng_stream

_STOP = object()


@dataclass(frozen=True)
class BenchConfig:
    workers: int = 4
    k_fixed: int = 4
    s: float = 1.0
    samples_per_epoch: int = 512
    batch_size: int = 16
    image_shape: Tuple[int, int, int] = (32, 32, 3)
    repetitions: int = 3
    seed: int = 0
    step_time: float = 0.025
    load_latency: float = 0.0002
    # batches allowed in flight per worker
    prefetch_factor: int = 2
    consumer: str = "sleep"
    corpus_dir: Optional[str] = None
    num_categories: int = 20
    timeout: float = 60.0

    def __post_init__(self):
        for name in ("workers", "k_fixed", "samples_per_epoch", "batch_size", "repetitions",
                     "prefetch_factor", "num_categories"):
            if getattr(self, name) < 1:
                raise ContractViolation(f"{name} must be positive")
        if not 0 <= self.s <= 1:
            raise ContractViolation("s must lie in [0, 1]")
        if self.step_time < 0 or self.load_latency < 0:
            raise ContractViolation("times must be nonnegative")
        if self.consumer not in ("sleep", "spin"):
            raise ContractViolation("consumer must be 'sleep' or 'spin'")
        if self.samples_per_epoch < self.k_fixed:
            raise ContractViolation("corpus must hold at least k_fixed samples")


@dataclass
class ThroughputReport:
    workers: int
    k: int
    s: float
    baseline: bool
    epoch_times: List[float]
    stream_digest: str
    overhead_pct: Optional[float] = None

    @property
    def mean_epoch_s(self) -> float:
        return float(np.mean(self.epoch_times))

    @property
    def sd_epoch_s(self) -> float:
        if len(self.epoch_times) < 2:
            raise ContractViolation("a standard deviation needs at least two repetitions")
        return float(np.std(self.epoch_times, ddof=1))

    def samples_per_s(self, samples_per_epoch: int) -> float:
        return samples_per_epoch / self.mean_epoch_s

    def to_json(self, samples_per_epoch: int) -> dict:
        return {"workers": self.workers, "k": self.k, "s": self.s, "baseline": self.baseline,
                "mean_epoch_s": self.mean_epoch_s, "sd_epoch_s": self.sd_epoch_s,
                "samples_per_s": self.samples_per_s(samples_per_epoch),
                "overhead_pct": self.overhead_pct, "epoch_times": list(self.epoch_times),
                "stream_digest": self.stream_digest}


class _SlowLoads:
    """Dataset proxy whose ``sample(i)`` first waits ``latency`` seconds."""

    def __init__(self, dataset: PartialDataset, latency: float):
        self._dataset = dataset
        self._latency = latency

    def __len__(self):
        return len(self._dataset)

    def index_of(self, sample_id):
        return self._dataset.index_of(sample_id)

    def sample(self, i):
        if self._latency:
            time.sleep(self._latency)
        return self._dataset.sample(i)


def make_corpus(config: BenchConfig) -> PartialDataset:
    """Seeded synthetic corpus; written as LMT1 files when ``corpus_dir`` is set."""
    rng = rng_stream(config.seed, 7)
    n, c = config.samples_per_epoch, config.num_categories
    images = rng.random((n, *config.image_shape), dtype=np.float32)
    labels = rng.choice(np.array([-1, 0, 1], dtype=np.int8), size=(n, c), p=[0.7, 0.25, 0.05])
    ids = [f"img{i:06d}" for i in range(n)]
    if config.corpus_dir is None:
        return PartialDataset([f"c{k}" for k in range(c)], ids, labels, images=images)
    root = Path(config.corpus_dir)
    root.mkdir(parents=True, exist_ok=True)
    refs = []
    for sid, im in zip(ids, images):
        ref = f"{sid}.lmt"
        if not (root / ref).exists():
            write_tensor(root / ref, im)
        refs.append(ref)
    return PartialDataset([f"c{k}" for k in range(c)], ids, labels, image_refs=refs,
                          image_root=root)


def _digest(index: int, sample) -> Tuple[int, str]:
    h = hashlib.blake2b(digest_size=16)
    h.update(sample.id.encode())
    h.update(np.ascontiguousarray(sample.image).tobytes())
    h.update(sample.labels.codes.tobytes())
    return index, h.hexdigest()


def _simulate_step(seconds: float, mode: str):
    if seconds <= 0:
        return
    if mode == "sleep":
        time.sleep(seconds)
        return
    end = time.perf_counter() + seconds
    while time.perf_counter() < end:
        pass


def run_epoch(dataset, config: BenchConfig, baseline: bool, epoch: int,
              record: bool = False):
    """Time one epoch; returns ``(seconds, sorted sample digests or None)``."""
    n = config.samples_per_epoch
    lm = LogicMixConfig(s=config.s, k_min=config.k_fixed, k_max=config.k_fixed,
                        seed=config.seed)
    order = rng_stream(config.seed, 9, epoch).permutation(n)
    batches = [order[i:i + config.batch_size] for i in range(0, n, config.batch_size)]
    loads = _SlowLoads(dataset, config.load_latency)
    out = queue.Queue(maxsize=config.prefetch_factor * config.workers)
    stop = threading.Event()

    def put(item):
        while not stop.is_set():
            try:
                out.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def worker(w: int):
        try:
            for b in range(w, len(batches), config.workers):
                produced = []
                for idx in batches[b]:
                    idx = int(idx)
                    sample = loads.sample(idx)
                    if not baseline:
                        sample = apply(sample, loads, lm, rng_stream(config.seed, epoch, idx),
                                       index=idx)
                    produced.append((idx, sample))
                if not put(produced):
                    return
        except BaseException as e:  # surfaced by the consumer
            put(e)

    threads = [threading.Thread(target=worker, args=(w,), daemon=True)
               for w in range(config.workers)]
    digests = [] if record else None
    start = time.perf_counter()
    for t in threads:
        t.start()
    try:
        for _ in range(len(batches)):
            try:
                item = out.get(timeout=config.timeout)
            except queue.Empty:
                raise HarnessError(f"no batch within {config.timeout}s; workers stalled") from None
            if isinstance(item, BaseException):
                raise HarnessError(f"worker failed: {item!r}") from item
            _simulate_step(config.step_time, config.consumer)
            if record:
                digests.extend(_digest(i, s) for i, s in item)
        elapsed = time.perf_counter() - start
    finally:
        stop.set()
        for t in threads:
            t.join(timeout=config.timeout)
    return elapsed, sorted(digests) if record else None


def run_throughput_bench(config: BenchConfig, baseline: bool,
                         dataset: Optional[PartialDataset] = None) -> ThroughputReport:
    """Run ``config.repetitions`` timed epochs.

    The digest covers every emitted sample of every epoch, so equal digests
    across worker counts mean identical sample streams.
    """
    dataset = dataset if dataset is not None else make_corpus(config)
    times, h = [], hashlib.blake2b(digest_size=16)
    for rep in range(config.repetitions):
        elapsed, digests = run_epoch(dataset, config, baseline, epoch=rep, record=True)
        times.append(elapsed)
        for idx, dg in digests:
            h.update(f"{rep}:{idx}:{dg};".encode())
    return ThroughputReport(config.workers, config.k_fixed, config.s, baseline, times,
                            h.hexdigest())


def overhead_pct(report: ThroughputReport, baseline: ThroughputReport) -> float:
    return 100.0 * (report.mean_epoch_s - baseline.mean_epoch_s) / baseline.mean_epoch_s


@dataclass
class BenchTable:
    config: BenchConfig
    baselines: dict = field(default_factory=dict)   # workers -> report
    cells: dict = field(default_factory=dict)       # (workers, k) -> report

    def to_json(self) -> dict:
        spe = self.config.samples_per_epoch
        rows = []
        for w in sorted(self.baselines):
            row = {"workers": w, "no_augment": self.baselines[w].to_json(spe), "logicmix": {}}
            for (ww, k), rep in sorted(self.cells.items()):
                if ww == w:
                    row["logicmix"][f"K={k}"] = rep.to_json(spe)
            rows.append(row)
        cfg = asdict(self.config)
        cfg["image_shape"] = list(cfg["image_shape"])
        return {"config": cfg, "rows": rows}

    def format_table(self) -> str:
        ks = sorted({k for _, k in self.cells})
        head = ["# Workers", "No augment"] + [f"LogicMix(K={k})" for k in ks]
        lines = ["  ".join(f"{h:>22}" for h in head)]
        for w in sorted(self.baselines):
            b = self.baselines[w]
            cols = [f"{w}", f"{b.mean_epoch_s:.3f} ± {b.sd_epoch_s:.3f}"]
            for k in ks:
                r = self.cells.get((w, k))
                cols.append("-" if r is None else
                            f"{r.mean_epoch_s:.3f} ± {r.sd_epoch_s:.3f} ({r.overhead_pct:+.1f}%)")
            lines.append("  ".join(f"{c:>22}" for c in cols))
        return "\n".join(lines)


def run_bench_grid(workers: Sequence[int], ks: Sequence[int], config: BenchConfig = BenchConfig(),
                   check_determinism: bool = True) -> BenchTable:
    """Table of epoch times over worker counts x K, with overhead vs the no-augment baseline."""
    table = BenchTable(config)
    dataset = make_corpus(config)
    for w in workers:
        cfg = replace(config, workers=w)
        table.baselines[w] = run_throughput_bench(cfg, baseline=True, dataset=dataset)
        for k in ks:
            rep = run_throughput_bench(replace(cfg, k_fixed=k), baseline=False, dataset=dataset)
            rep.overhead_pct = overhead_pct(rep, table.baselines[w])
            table.cells[(w, k)] = rep
    if check_determinism:
        for k in ks:
            digests = {table.cells[(w, k)].stream_digest for w in workers}
            if len(digests) != 1:
                raise HarnessError(f"K={k}: sample streams differ across worker counts")
    return table


def stream_digests(workers: Sequence[int], config: BenchConfig) -> dict:
    """Digest of the emitted sample stream per worker count, with timing costs disabled."""
    fast = replace(config, step_time=0.0, load_latency=0.0, repetitions=1)
    dataset = make_corpus(fast)
    return {w: run_throughput_bench(replace(fast, workers=w), baseline=False,
                                    dataset=dataset).stream_digest for w in workers}


def temporary_corpus_dir() -> str:
    return tempfile.mkdtemp(prefix="logicmix-corpus-")
