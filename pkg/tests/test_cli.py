import json

import jsonschema
import numpy as np
import pytest

from logicmix.cli import load_schema, main
from logicmix.datasets import read_labels_jsonl
from logicmix.mixing import read_tensor, write_tensor

TINY_TRAIN = ["--epochs", "2", "--n-train", "200", "--n-test", "100"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def validate(obj, schema):
    jsonschema.validate(obj, load_schema(schema))


@pytest.fixture
def two_sample(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"categories": ["cat", "dog", "car"]}\n'
                    '{"id": "a", "image": null, "labels": [1, 0, null]}\n'
                    '{"id": "b", "image": null, "labels": [1, 1, 0]}\n')
    return path


@pytest.fixture
def image_dataset(tmp_path):
    rng = np.random.default_rng(0)
    lines = [json.dumps({"categories": ["a", "b", "c"]})]
    for i in range(6):
        write_tensor(tmp_path / f"im{i}.lmt", rng.random((4, 4, 3), dtype=np.float32))
        labels = [None if v < 0 else int(v) for v in rng.integers(-1, 2, 3)]
        lines.append(json.dumps({"id": f"s{i}", "image": f"im{i}.lmt", "labels": labels}))
    path = tmp_path / "six.jsonl"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_help(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "usage: logicmix" in out
    for cmd in ("mix", "drop", "stats", "pseudo", "train", "compare", "bench", "sweep"):
        assert cmd in out


def test_unknown_subcommand_and_flag(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1 and "usage" in err
    code, _, err = run(capsys, "stats", "--frob", "1")
    assert code == 1 and "usage" in err
    code, _, err = run(capsys)
    assert code == 1


def test_stats_two_sample_example(capsys, two_sample):
    code, out, _ = run(capsys, "stats", "--labels", str(two_sample))
    assert code == 0
    assert "mean positives     1.5" in out
    assert "mean negatives     1.0" in out
    assert "mean unknowns      0.5" in out


def test_stats_json(capsys, two_sample):
    code, out, _ = run(capsys, "stats", "--labels", str(two_sample), "--json")
    obj = json.loads(out)
    validate(obj, "stats")
    assert obj["mean_positives_per_sample"] == 1.5 and not obj["augmented"]
    code, out, _ = run(capsys, "stats", "--labels", str(two_sample), "--json", "--augmented",
                       "--kmin", "2", "--kmax", "2", "--draws", "100")
    obj = json.loads(out)
    validate(obj, "stats")
    assert (obj["mean_positives_per_sample"], obj["mean_unknowns_per_sample"]) == (2.0, 1.0)


def test_runtime_errors_exit_2(capsys, tmp_path, two_sample):
    code, _, err = run(capsys, "stats", "--labels", str(tmp_path / "missing.jsonl"))
    assert code == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"categories": ["a"]}\n{"id": "x", "image": null, "labels": [2]}\n')
    code, _, err = run(capsys, "stats", "--labels", str(bad))
    assert code == 2 and ":2:" in err
    code, _, _ = run(capsys, "stats", "--labels", str(two_sample), "--augmented", "--kmax", "3")
    assert code == 2


def test_missing_required_option_is_usage_error(capsys):
    code, _, err = run(capsys, "drop", "--labels", "x.jsonl")
    assert code == 1 and "--proportion" in err


def test_mix(capsys, tmp_path, image_dataset):
    out = tmp_path / "mixed"
    code, _, _ = run(capsys, "mix", "--labels", str(image_dataset), "--images", str(tmp_path),
                     "--s", "1", "--kmin", "2", "--kmax", "3", "--seed", "4", "--out", str(out))
    assert code == 0
    mixed = read_labels_jsonl(out / "labels.jsonl", image_root=out)
    src = read_labels_jsonl(image_dataset, image_root=tmp_path)
    lines = (out / "labels.jsonl").read_text().splitlines()
    validate(json.loads(lines[0]), "labels_header")
    for i, line in enumerate(lines[1:]):
        validate(json.loads(line), "labels_line")
        parts = mixed.ids[i].split("+")
        assert parts[0] == src.ids[i] and 2 <= len(parts) <= 3
        rows = [src.index_of(p) for p in parts]
        expect = np.mean([src.load_image(r).astype(np.float64) for r in rows], axis=0)
        np.testing.assert_allclose(read_tensor(out / mixed.image_refs[i]), expect, atol=1e-6)
    # same seed, same output
    out2 = tmp_path / "mixed2"
    run(capsys, "mix", "--labels", str(image_dataset), "--images", str(tmp_path),
        "--s", "1", "--kmin", "2", "--kmax", "3", "--seed", "4", "--out", str(out2))
    assert (out / "labels.jsonl").read_text() == (out2 / "labels.jsonl").read_text()


def test_drop(capsys, tmp_path, image_dataset):
    out = tmp_path / "dropped.jsonl"
    code, _, _ = run(capsys, "drop", "--labels", str(image_dataset), "--proportion", "0.5",
                     "--seed", "2", "--out", str(out))
    assert code == 0
    src, dropped = read_labels_jsonl(image_dataset), read_labels_jsonl(out)
    known = dropped.labels != -1
    assert np.array_equal(dropped.labels[known], src.labels[known])


def test_pseudo(capsys, tmp_path, image_dataset):
    logits = tmp_path / "logits.csv"
    np.savetxt(logits, np.random.default_rng(1).normal(0, 3, (6, 3)), delimiter=",")
    code, out, _ = run(capsys, "pseudo", "--logits", str(logits), "--labels", str(image_dataset),
                       "--theta-plus", "2", "--theta-minus", "-2", "--epoch", "3")
    assert code == 0
    src = read_labels_jsonl(image_dataset)
    records = [json.loads(l) for l in out.splitlines()]
    assert records
    for rec in records:
        validate(rec, "pseudo_label")
        assert src.labels[rec["index"], rec["category"]] == -1 and rec["epoch"] == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,x\n")
    code, _, _ = run(capsys, "pseudo", "--logits", str(bad), "--labels", str(image_dataset),
                     "--theta-plus", "2", "--theta-minus", "-2")
    assert code == 2


def test_coco(capsys, tmp_path):
    ann = tmp_path / "inst.json"
    ann.write_text(json.dumps({
        "images": [{"id": 1, "file_name": "a.jpg"}, {"id": 2, "file_name": "b.jpg"}],
        "annotations": [{"id": 9, "image_id": 1, "category_id": 5}],
        "categories": [{"id": 5, "name": "person"}, {"id": 2, "name": "bike"}]}))
    out = tmp_path / "coco.jsonl"
    assert run(capsys, "coco", "--annotations", str(ann), "--out", str(out))[0] == 0
    ds = read_labels_jsonl(out)
    assert ds.categories.names == ("bike", "person") and ds.labels.tolist() == [[0, 1], [0, 0]]


def test_train_config_file_matches_flags(capsys, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('epochs = 2\nn_train = 200\nn-test = 100\nk_max = 4\nvariant = "logicmix"\n'
                   "seed = 9\n")
    code, from_file, _ = run(capsys, "train", "--config", str(cfg))
    assert code == 0
    _, from_flags, _ = run(capsys, "train", *TINY_TRAIN, "--kmax", "4", "--seed", "9")
    assert from_file == from_flags
    obj = json.loads(from_file)
    validate(obj, "train_result")
    assert obj["variant"] == "logicmix(s=0.5,k=2-4)" and obj["seed"] == 9
    # flags win over the file
    _, override, _ = run(capsys, "train", "--config", str(cfg), "--seed", "1")
    assert json.loads(override)["seed"] == 1


def test_bad_config_files(capsys, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("bogus = 1\n")
    assert run(capsys, "train", "--config", str(bad))[0] == 1
    bad.write_text("epochs = = 2\n")
    assert run(capsys, "train", "--config", str(bad))[0] == 1
    assert run(capsys, "train", "--config", str(tmp_path / "nope.toml"))[0] == 1


def test_train_file_backed(capsys, tmp_path):
    from logicmix.datasets import write_labels_jsonl
    from logicmix.trainer import synthetic_task

    task = synthetic_task(n_train=200, n_test=100)
    np.save(tmp_path / "xtr.npy", task.train_features)
    np.save(tmp_path / "xte.npy", task.test_features)
    write_labels_jsonl(task.train, tmp_path / "tr.jsonl")
    from logicmix.datasets import PartialDataset
    write_labels_jsonl(PartialDataset(task.train.categories, [f"t{i}" for i in range(100)],
                                      task.test_labels), tmp_path / "te.jsonl")
    files = ["--train-features", str(tmp_path / "xtr.npy"), "--train-labels",
             str(tmp_path / "tr.jsonl"), "--test-features", str(tmp_path / "xte.npy"),
             "--test-labels", str(tmp_path / "te.jsonl")]
    code, from_files, _ = run(capsys, "train", "--epochs", "2", "--variant", "none", *files)
    assert code == 0
    _, synthetic, _ = run(capsys, "train", *TINY_TRAIN, "--variant", "none")
    assert json.loads(from_files)["map"] == json.loads(synthetic)["map"]
    assert run(capsys, "train", *files[:2])[0] == 1


def test_compare(capsys, tmp_path):
    out = tmp_path / "cmp.json"
    code, table, _ = run(capsys, "compare", *TINY_TRAIN, "--seeds", "0,1", "--variant", "none",
                         "--variant", "pme", "--out", str(out))
    assert code == 0 and "mAP" in table
    obj = json.loads(out.read_text())
    validate(obj, "compare_results")
    assert {r["variant"] for r in obj["runs"]} == {"none", "pme"} and len(obj["runs"]) == 4


def test_sweep(capsys, tmp_path):
    out = tmp_path / "sweep.json"
    code, table, _ = run(capsys, "sweep", *TINY_TRAIN, "--grid", "2:2:0.5,2:3:1.0",
                         "--proportions", "0.1,0.5", "--out", str(out))
    assert code == 0
    head = table.splitlines()[0].split()
    assert head == ["K_min", "K_max", "s", "10%", "50%", "Avg."]
    obj = json.loads(out.read_text())
    validate(obj, "sweep")
    assert [(r["k_min"], r["k_max"], r["s"]) for r in obj["rows"]] == [(2, 2, 0.5), (2, 3, 1.0)]
    assert run(capsys, "sweep", "--grid", "2:3")[0] == 1


def test_bench(capsys, tmp_path):
    out = tmp_path / "bench.json"
    code, table, _ = run(capsys, "bench", "--workers", "1,2", "--k", "2", "--reps", "2",
                         "--samples", "32", "--step-time", "0", "--load-latency", "0",
                         "--out", str(out))
    assert code == 0 and "LogicMix(K=2)" in table
    obj = json.loads(out.read_text())
    validate(obj, "bench_report")
    digests = {row["logicmix"]["K=2"]["stream_digest"] for row in obj["rows"]}
    assert len(digests) == 1
