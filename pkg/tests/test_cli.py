import json
import random

from casepath.cli import main

from conftest import FIXTURE
from synthgraph import event_split, event_world, lines


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_ingest_summary(capsys):
    code, out, _ = _run(capsys, [
        "ingest", str(FIXTURE),
        "--subclass-relation", "subclassOf", "--type-relation", "instanceOf",
    ])
    assert code == 0
    summary = json.loads(out)
    assert summary["triples"] == 26
    assert summary["entities"] == 18
    assert summary["subclass_relation_resolved"] == "subclassOf"


def test_ingest_missing_file(capsys):
    code, _, err = _run(capsys, ["ingest", "no/such/file.tsv"])
    assert code == 2
    assert "error:" in err


def test_predict_fixture_top_instanceof(capsys):
    code, out, _ = _run(capsys, [
        "predict", "--train", str(FIXTURE),
        "--subclass-relation", "subclassOf", "--type-relation", "instanceOf",
        "--cause", "NewQuake", "--causal-relation", "hasEffect",
        "--target-relation", "instanceOf", "--target-relation", "country",
        "--extra-triple", "NewQuake", "instanceOf", "MegathrustEarthquake",
        "--extra-triple", "NewQuake", "country", "Japan",
        "--epsilon", "0", "--seed", "3", "--mode", "base",
    ])
    assert code == 0
    records = [json.loads(line) for line in out.strip().splitlines()]
    by_rel = {r["target_relation"]: r for r in records}
    assert by_rel["instanceOf"]["candidates"][0]["entity"] == "Tsunami"
    assert by_rel["instanceOf"]["candidates"][0]["score"] == 1.0
    assert by_rel["country"]["candidates"][0]["entity"] == "Japan"
    assert all("config" in r for r in records)
    steps = {tuple(p["steps"]) for p in by_rel["instanceOf"]["paths"]}
    assert ("instanceOf", "subclassOf", "~hasCause") in steps


def test_predict_requires_query(capsys, tmp_path):
    code, _, err = _run(capsys, ["predict", "--train", str(FIXTURE)])
    assert code == 2
    assert "nothing to predict" in err


def test_predict_query_file_and_determinism(capsys, tmp_path):
    queries = tmp_path / "queries.jsonl"
    queries.write_text(json.dumps({
        "cause": "NewQuake",
        "relation": "hasEffect",
        "targets": ["instanceOf", "country"],
        "extra_triples": [
            ["NewQuake", "instanceOf", "MegathrustEarthquake"],
            ["NewQuake", "country", "Japan"],
        ],
    }) + "\n")
    argv = [
        "predict", "--train", str(FIXTURE),
        "--subclass-relation", "subclassOf", "--type-relation", "instanceOf",
        "--query-file", str(queries), "--seed", "11",
    ]
    out_a = tmp_path / "a.jsonl"
    out_b = tmp_path / "b.jsonl"
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_split_and_evaluate_roundtrip(capsys, tmp_path):
    rng = random.Random(21)
    triples, pairs = event_world(rng, n_pairs=50, n_classes=4, n_countries=3, n_topics=5)
    data = tmp_path / "world.tsv"
    data.write_text("\n".join(lines(triples)) + "\n")

    split_dir = tmp_path / "split"
    code, out, _ = _run(capsys, [
        "split", "--input", str(data), "--n-test", "4", "--n-valid", "2",
        "--seed", "5", "--out-dir", str(split_dir),
    ])
    assert code == 0
    summary = json.loads(out)
    assert summary["test_triples"] > 0
    assert (split_dir / "train.txt").exists()

    code, out, err = _run(capsys, [
        "evaluate", "--train", str(split_dir / "train.txt"),
        "--split-dir", str(split_dir),
        "--subclass-relation", "subclassOf", "--type-relation", "instanceOf",
        "--n-paths", "25", "--cases-head", "6", "--cases-cov", "2",
        "--seed", "2", "--mode", "base", "--threads", "2",
    ])
    assert code == 0
    report = json.loads(out)
    assert report["mode"] == "base"
    assert report["n_links"] > 0
    assert 0.0 <= report["mrr"] <= 1.0
    assert report["config"]["seed"] == 2


def test_evaluate_empty_split_fails(capsys, tmp_path):
    (tmp_path / "train.txt").write_text("a\tr\tb\n")
    code, _, err = _run(capsys, [
        "evaluate", "--train", str(tmp_path / "train.txt"), "--split-dir", str(tmp_path),
    ])
    assert code == 2
    assert "error:" in err


def test_evaluate_deterministic_across_threads(tmp_path):
    rng = random.Random(33)
    triples, pairs = event_world(rng, n_pairs=40, n_classes=4, n_countries=3, n_topics=5)
    train, conns, test_rows = event_split(triples, pairs, 4, rng)
    split_dir = tmp_path / "split"
    split_dir.mkdir()
    (split_dir / "train.txt").write_text("\n".join("\t".join(r) for r in train) + "\n")
    (split_dir / "test_connections.txt").write_text(
        "\n".join("\t".join(r) for r in conns) + "\n"
    )
    (split_dir / "test_triples.txt").write_text(
        "\n".join("\t".join(r) for r in test_rows) + "\n"
    )
    base = [
        "evaluate", "--train", str(split_dir / "train.txt"), "--split-dir", str(split_dir),
        "--subclass-relation", "subclassOf", "--type-relation", "instanceOf",
        "--n-paths", "20", "--cases-head", "5", "--cases-cov", "1", "--seed", "9",
        "--modes", "base,refined,refined+base",
    ]
    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    assert main(base + ["--threads", "1", "--out", str(out_a)]) == 0
    assert main(base + ["--threads", "3", "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_config_file_defaults_and_override(capsys, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "subclass-relation": "subclassOf",
        "type-relation": "instanceOf",
        "epsilon": 0.0,
        "seed": 4,
    }))
    code, out, _ = _run(capsys, [
        "predict", "--train", str(FIXTURE), "--config", str(config),
        "--cause", "NewQuake", "--causal-relation", "hasEffect",
        "--target-relation", "instanceOf",
        "--extra-triple", "NewQuake", "instanceOf", "MegathrustEarthquake",
        "--extra-triple", "NewQuake", "country", "Japan",
        "--mode", "base",
        "--seed", "12",  # explicit flag beats the config file
    ])
    assert code == 0
    record = json.loads(out.strip().splitlines()[0])
    assert record["config"]["epsilon"] == 0.0
    assert record["config"]["seed"] == 12
    assert record["candidates"][0]["entity"] == "Tsunami"


def test_unknown_config_key(capsys, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"not-a-flag": 1}))
    code, _, err = _run(capsys, [
        "ingest", str(FIXTURE), "--config", str(config),
    ])
    assert code == 2
    assert "unknown config key" in err


def test_new_flags_parse_and_run(capsys):
    code, out, _ = _run(capsys, [
        "predict", "--train", str(FIXTURE),
        "--subclass-relation", "subclassOf", "--type-relation", "instanceOf",
        "--cause", "NewQuake", "--causal-relation", "hasEffect",
        "--target-relation", "instanceOf",
        "--extra-triple", "NewQuake", "instanceOf", "MegathrustEarthquake",
        "--extra-triple", "NewQuake", "country", "Japan",
        "--mode", "base", "--no-type-closure-expansion", "--cov-may-reuse-causes",
    ])
    assert code == 0
    record = json.loads(out.strip().splitlines()[0])
    assert record["config"]["type_closure_expansion"] is False
    assert record["config"]["unique_causes_across_passes"] is False
