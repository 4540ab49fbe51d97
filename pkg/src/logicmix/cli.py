"""``logicmix`` command line: mix, drop, stats, pseudo, coco, train, compare, bench, sweep.

Every subcommand accepts ``--config FILE``, a flat TOML file whose keys are
the subcommand's option names (``k_min`` or ``k-min``); flags given on the
command line win over the file. Exit status: 0 ok, 1 usage error, 2 runtime
error.
"""
import argparse
import csv
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import LogicMixError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_train_options(p):
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma-plus", type=float, default=4.0)
    p.add_argument("--gamma-minus", type=float, default=0.0)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--kmin", "--k-min", dest="k_min", type=int, default=2)
    p.add_argument("--kmax", "--k-max", dest="k_max", type=int, default=3)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--theta-plus", type=float, default=None)
    p.add_argument("--theta-minus", type=float, default=None)
    # data: synthetic unless file paths are given
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--categories", type=int, default=10)
    p.add_argument("--dims", type=int, default=32)
    p.add_argument("--known-proportion", type=float, default=0.5)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--train-features", default=None, help=".npy N x D feature matrix")
    p.add_argument("--train-labels", default=None, help="JSONL labels for the training features")
    p.add_argument("--test-features", default=None)
    p.add_argument("--test-labels", default=None, help="fully labeled JSONL test labels")


def build_parser():
    parser = _Parser(prog="logicmix", description="LogicMix augmentation, label tools, desk-scale training and benchmarks.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", default=None, help="flat TOML file of option values")
        return p

    p = command("mix", "write LogicMix-augmented samples (LMT1 tensors + JSONL labels)")
    p.add_argument("--labels")
    p.add_argument("--images", help="directory the label file's image references resolve against")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--kmin", "--k-min", dest="k_min", type=int, default=2)
    p.add_argument("--kmax", "--k-max", dest="k_max", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epoch", type=int, default=0)
    p.add_argument("--out")

    p = command("drop", "simulate a known-label proportion by dropping labels")
    p.add_argument("--labels")
    p.add_argument("--proportion", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = command("stats", "mean positive/negative/unknown labels per sample")
    p.add_argument("--labels")
    p.add_argument("--augmented", action="store_true")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--kmin", "--k-min", dest="k_min", type=int, default=2)
    p.add_argument("--kmax", "--k-max", dest="k_max", type=int, default=3)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print JSON instead of text")

    p = command("pseudo", "curriculum pseudo-labels from a logit CSV")
    p.add_argument("--logits", help="CSV, one row per sample, one column per category")
    p.add_argument("--labels")
    p.add_argument("--theta-plus", type=float, default=None)
    p.add_argument("--theta-minus", type=float, default=None)
    p.add_argument("--epoch", type=int, default=0)
    p.add_argument("--out", default=None, help="JSONL output (default: stdout)")

    p = command("coco", "convert a COCO instances file to the JSONL label format")
    p.add_argument("--annotations")
    p.add_argument("--out")

    p = command("train", "train one desk-scale model and report mAP")
    p.add_argument("--variant", default="logicmix",
                   choices=["mixup-an", "wang", "ml-mixup", "pme", "logicmix", "none"])
    p.add_argument("--out", default=None)
    _add_train_options(p)

    p = command("compare", "train every variant over several seeds and tabulate mAP")
    p.add_argument("--variant", action="append", default=None,
                   choices=["mixup-an", "wang", "ml-mixup", "pme", "logicmix", "none"],
                   help="repeatable; default is all variants")
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--out", default=None)
    _add_train_options(p)

    p = command("bench", "data-loader throughput with and without LogicMix")
    p.add_argument("--workers", type=_int_list, default=[1, 2, 4, 8])
    p.add_argument("--k", type=_int_list, default=[2, 4, 8])
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--step-time", type=float, default=0.025)
    p.add_argument("--load-latency", type=float, default=0.0002)
    p.add_argument("--consumer", choices=["sleep", "spin"], default="sleep")
    p.add_argument("--corpus-dir", default=None, help="read LMT1 files from disk instead of memory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = command("sweep", "grid over (k_min, k_max, s) at several known-label proportions")
    p.add_argument("--grid", default="2:2:0.5,3:3:0.5,2:3:0.5,2:3:0.0,2:3:1.0",
                   help="comma-separated k_min:k_max:s triples")
    p.add_argument("--proportions", type=_float_list, default=[0.1, 0.5, 0.9])
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--out", default=None)
    _add_train_options(p)
    return parser, sub


def _load_config(path, subparser):
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}")
    except tomllib.TOMLDecodeError as e:
        raise UsageError(f"bad config {path}: {e}")
    known = {a.dest for a in subparser._actions}
    values = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest == "kmin":
            dest = "k_min"
        if dest == "kmax":
            dest = "k_max"
        if dest not in known or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        values[dest] = value
    return values


def parse_args(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("logicmix: error: a subcommand is required", file=sys.stderr)
        raise SystemExit(1)
    subparser = sub.choices[args.command]
    if args.config:
        subparser.set_defaults(**_load_config(args.config, subparser))
        args = parser.parse_args(argv)
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join(
            "--" + n.replace("_", "-") for n in missing))


def load_schema(name: str) -> dict:
    """JSON schema shipped with the package, e.g. ``load_schema("stats")``."""
    return json.loads(resources.files("logicmix").joinpath("schemas", f"{name}.json").read_text())


def _emit_json(obj, out):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# -- subcommands ------------------------------------------------------------

def cmd_mix(args):
    from .datasets import PartialDataset, read_labels_jsonl
    from .mixing import write_tensor
    from .pipeline import LogicMix, LogicMixConfig

    _require(args, "labels", "images", "out")
    dataset = read_labels_jsonl(args.labels, image_root=args.images)
    pipeline = LogicMix(LogicMixConfig(args.s, args.k_min, args.k_max, args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ids, refs, labels = [], [], []
    for i in range(len(dataset)):
        sample = pipeline(dataset, i, epoch=args.epoch)
        ref = f"{i:06d}.lmt"
        write_tensor(out / ref, sample.image)
        ids.append(sample.id)
        refs.append(ref)
        labels.append(sample.labels.codes)
    from .datasets import write_labels_jsonl
    write_labels_jsonl(PartialDataset(dataset.categories, ids, np.array(labels), refs),
                       out / "labels.jsonl")
    print(f"wrote {len(ids)} samples to {out}")


def cmd_drop(args):
    from .datasets import drop_labels, read_labels_jsonl, write_labels_jsonl

    _require(args, "labels", "proportion", "out")
    dropped = drop_labels(read_labels_jsonl(args.labels), args.proportion, args.seed)
    write_labels_jsonl(dropped, args.out)
    print(f"wrote {len(dropped)} samples to {args.out}")


def cmd_stats(args):
    from .datasets import compute_label_stats, estimate_augmented_stats, read_labels_jsonl
    from .pipeline import LogicMixConfig

    _require(args, "labels")
    dataset = read_labels_jsonl(args.labels)
    if args.augmented:
        stats = estimate_augmented_stats(
            dataset, LogicMixConfig(args.s, args.k_min, args.k_max, args.seed), args.draws,
            args.seed)
    else:
        stats = compute_label_stats(dataset)
    if args.json:
        _emit_json({"augmented": bool(args.augmented), "samples": len(dataset),
                    **stats.as_dict()}, None)
        return
    print(f"samples            {len(dataset)}")
    print(f"categories         {stats.num_categories}")
    print(f"mean positives     {round(stats.mean_positives_per_sample, 4)}")
    print(f"mean negatives     {round(stats.mean_negatives_per_sample, 4)}")
    print(f"mean unknowns      {round(stats.mean_unknowns_per_sample, 4)}")
    print(f"known fraction     {round(stats.known_fraction, 4)}")


def read_logits_csv(path) -> np.ndarray:
    with open(path, newline="") as f:
        rows = [r for r in csv.reader(f) if r]
    try:
        return np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as e:
        raise LogicMixError(f"{path}: non-numeric logit ({e})") from None


def cmd_pseudo(args):
    from .curriculum import CurriculumConfig, generate_pseudo_labels
    from .datasets import read_labels_jsonl

    _require(args, "logits", "labels", "theta_plus", "theta_minus")
    dataset = read_labels_jsonl(args.labels)
    pseudo = generate_pseudo_labels(read_logits_csv(args.logits), dataset,
                                    CurriculumConfig(args.theta_plus, args.theta_minus),
                                    args.epoch)
    lines = [json.dumps({**rec, "id": dataset.ids[rec["index"]],
                         "category_name": dataset.categories.names[rec["category"]]})
             for rec in pseudo.to_records()]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_coco(args):
    from .datasets import ingest_coco, write_labels_jsonl

    _require(args, "annotations", "out")
    dataset = ingest_coco(args.annotations)
    write_labels_jsonl(dataset, args.out)
    print(f"wrote {len(dataset)} samples, {dataset.num_categories} categories to {args.out}")


def _train_config(args, variant):
    from .curriculum import CurriculumConfig
    from .loss import LossConfig
    from .pipeline import LogicMixConfig
    from .trainer import TrainConfig
    from .variants import Variant, VariantConfig

    variant = Variant(variant)
    curriculum = None
    if args.theta_plus is not None or args.theta_minus is not None:
        _require(args, "theta_plus", "theta_minus")
        curriculum = CurriculumConfig(args.theta_plus, args.theta_minus)
    lm = LogicMixConfig(args.s, args.k_min, args.k_max, args.seed) \
        if variant is Variant.LOGICMIX else None
    return TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                       learning_rate=args.learning_rate, momentum=args.momentum, seed=args.seed,
                       variant=VariantConfig(variant, args.alpha, args.seed), logicmix=lm,
                       curriculum=curriculum,
                       loss=LossConfig(args.gamma_plus, args.gamma_minus, args.margin))


def _task(args, known_proportion=None):
    from .datasets import drop_labels, read_labels_jsonl
    from .trainer import SyntheticTask, synthetic_task

    files = (args.train_features, args.train_labels, args.test_features, args.test_labels)
    if any(f is not None for f in files):
        if not all(f is not None for f in files):
            raise UsageError("file-backed data needs --train-features, --train-labels, "
                             "--test-features and --test-labels")
        train = read_labels_jsonl(args.train_labels)
        if known_proportion is not None:
            train = drop_labels(train, known_proportion, args.data_seed)
        test = read_labels_jsonl(args.test_labels)
        return SyntheticTask(np.load(args.train_features), train, np.load(args.test_features),
                             np.array(test.labels))
    return synthetic_task(args.n_train, args.n_test, args.categories, args.dims,
                          args.known_proportion if known_proportion is None else known_proportion,
                          args.data_seed)


def cmd_train(args):
    from .trainer import evaluate, train

    task = _task(args)
    config = _train_config(args, args.variant)
    result = train(task.train_features, task.train, config)
    metrics = evaluate(result.model, task.test_features, task.test_labels)
    _emit_json({"variant": config.name, "seed": config.seed, **metrics.to_json(),
                "losses": result.losses}, args.out)


def cmd_compare(args):
    from .trainer import run_comparison

    variants = args.variant or ["none", "logicmix", "mixup-an", "wang", "ml-mixup", "pme"]
    configs = [_train_config(args, v) for v in variants]
    result = run_comparison(configs, _task(args), seeds=args.seeds)
    print(result.format_table())
    if args.out:
        Path(args.out).write_text(result.to_json() + "\n")


def cmd_bench(args):
    from .bench import BenchConfig, run_bench_grid

    config = BenchConfig(s=args.s, samples_per_epoch=args.samples, batch_size=args.batch_size,
                         repetitions=args.reps, seed=args.seed, step_time=args.step_time,
                         load_latency=0.0 if args.corpus_dir else args.load_latency,
                         consumer=args.consumer, corpus_dir=args.corpus_dir)
    table = run_bench_grid(args.workers, args.k, config)
    print(table.format_table())
    if args.out:
        Path(args.out).write_text(json.dumps(table.to_json(), indent=2) + "\n")


def _parse_grid(text):
    grid = []
    for item in text.split(","):
        parts = item.strip().split(":")
        if len(parts) != 3:
            raise UsageError(f"grid entry {item!r} is not k_min:k_max:s")
        try:
            grid.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError:
            raise UsageError(f"grid entry {item!r} is not k_min:k_max:s")
    return grid


def cmd_sweep(args):
    from .pipeline import LogicMixConfig
    from .trainer import run_comparison

    grid = _parse_grid(args.grid)
    tasks = {p: _task(args, known_proportion=p) for p in args.proportions}
    base = _train_config(args, "logicmix")
    rows = []
    for k_min, k_max, s in grid:
        config = replace(base, logicmix=LogicMixConfig(s, k_min, k_max, args.seed))
        maps = {}
        for p, task in tasks.items():
            maps[f"{round(100 * p)}%"] = run_comparison([config], task, args.seeds).summary()[0][
                "mean_map"]
        rows.append({"k_min": k_min, "k_max": k_max, "s": s, "map": maps,
                     "avg": float(np.mean(list(maps.values())))})
    cols = [f"{round(100 * p)}%" for p in args.proportions]
    print("  ".join(f"{h:>6}" for h in ["K_min", "K_max", "s", *cols, "Avg."]))
    for r in rows:
        vals = [f"{100 * r['map'][c]:6.2f}" for c in cols]
        print("  ".join([f"{r['k_min']:>6}", f"{r['k_max']:>6}", f"{r['s']:>6.2f}", *vals,
                         f"{100 * r['avg']:6.2f}"]))
    if args.out:
        Path(args.out).write_text(json.dumps({"rows": rows}, indent=2) + "\n")


COMMANDS = {"mix": cmd_mix, "drop": cmd_drop, "stats": cmd_stats, "pseudo": cmd_pseudo,
            "coco": cmd_coco, "train": cmd_train, "compare": cmd_compare, "bench": cmd_bench,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as e:
        return int(e.code or 0)
    except UsageError as e:
        print(f"logicmix: error: {e}", file=sys.stderr)
        return 1
    except (LogicMixError, OSError, ValueError) as e:
        print(f"logicmix: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
