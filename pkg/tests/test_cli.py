import json

import jsonschema
import numpy as np
import pytest
import yaml

from projdebias.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from projdebias.debias import ProjectionPipeline
from projdebias.embeddings import load_text_embeddings
from projdebias.experiment import (
    StrategyToken,
    aggregate,
    load_config,
    parse_strategy,
    run_experiment,
    validate_report,
)


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out-dir", str(out), "--words", "98", "--dim", "12", "--seed", "3"]) == EXIT_OK
    return out


@pytest.fixture(scope="module")
def ingested(synth_dir, tmp_path_factory):
    """Two-class and three-class datasets over the 100-token space."""
    out = {}
    for name, extra in (("two", []), ("three", ["--neutral-k", "14", "--threshold", "0.5"])):
        d = tmp_path_factory.mktemp(name)
        rc = main(["ingest", "--embeddings", str(synth_dir / "embeddings.txt"), "--k", "14", "--out-dir", str(d), *extra])
        assert rc == EXIT_OK
        out[name] = d
    return out


def small_config(synth_dir, tmp_path, **extra):
    cfg = yaml.safe_load((synth_dir / "experiment.yaml").read_text())
    cfg["embeddings"]["path"] = str(synth_dir / "embeddings.txt")
    cfg["metrics"]["similarity"] = [str(synth_dir / "similarity.tsv")]
    cfg["metrics"]["weat"] = [str(synth_dir / "weat.json")]
    cfg["strategy"] = "MP+R5"
    cfg.update(extra)
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


# ---- ingest --------------------------------------------------------------------------


def test_ingest_writes_disjoint_classes(ingested, capsys):
    data = json.loads((ingested["three"] / "dataset.json").read_text())
    seen = [tok for c in data["classes"] for tok in c["tokens"]]
    assert len(seen) == len(set(seen))
    assert len(data["classes"]) == 3
    assert load_text_embeddings(ingested["three"] / "space.txt").n == 100


def test_ingest_missing_seed_token(synth_dir, tmp_path, capsys):
    rc = main(["ingest", "--embeddings", str(synth_dir / "embeddings.txt"), "--plus", "zzz", "--k", "5", "--out-dir", str(tmp_path)])
    assert rc == EXIT_DATA
    assert "zzz" in capsys.readouterr().err


def test_ingest_limit_beyond_file(synth_dir, tmp_path, caplog):
    rc = main(["ingest", "--embeddings", str(synth_dir / "embeddings.txt"), "--limit", "5000", "--k", "5", "--out-dir", str(tmp_path)])
    assert rc == EXIT_OK
    assert load_text_embeddings(tmp_path / "space.txt").n == 100
    assert "limit" in caplog.text


def test_missing_file_is_data_error(tmp_path):
    assert main(["ingest", "--embeddings", str(tmp_path / "nope.txt"), "--k", "5", "--out-dir", str(tmp_path)]) == EXIT_DATA


# ---- debias ------------------------------------------------------------------------------


def run_debias(ingested, name, tmp_path, *extra):
    d = ingested[name]
    out = tmp_path / "pipe.json"
    rc = main(["debias", "--space", str(d / "space.txt"), "--dataset", str(d / "dataset.json"), "--out-pipeline", str(out), *extra])
    assert rc == EXIT_OK
    return ProjectionPipeline.load(out)


def test_debias_mp_two_classes(ingested, tmp_path):
    pipe = run_debias(ingested, "two", tmp_path, "--strategy", "MP")
    assert len(pipe) == 1


def test_debias_mp_three_classes(ingested, tmp_path):
    pipe = run_debias(ingested, "three", tmp_path, "--strategy", "MP", "--out-space", str(tmp_path / "after.txt"))
    assert len(pipe) == 2
    after = load_text_embeddings(tmp_path / "after.txt")
    np.testing.assert_allclose(after.matrix @ pipe.steps[0].w.coords, 0, atol=1e-6)


def test_debias_inlp_budget(ingested, tmp_path, capsys):
    pipe = run_debias(ingested, "two", tmp_path, "--strategy", "INLP", "--max-iters", "35")
    assert 1 <= len(pipe) <= 35
    assert "inlp dev accuracy" in capsys.readouterr().out


@pytest.mark.parametrize("strategy,expected", [("MP+R34", 35), ("MP+R5", 6), ("R3", 3)])
def test_composed_step_counts(ingested, tmp_path, strategy, expected):
    assert len(run_debias(ingested, "two", tmp_path, "--strategy", strategy)) == expected


def test_inlp_plus_random_counts(ingested, tmp_path):
    pipe = run_debias(ingested, "two", tmp_path, "--strategy", "INLP8+R27", "--stop-margin", "-1")
    strategies = [s.strategy for s in pipe.steps]
    assert strategies.count("RANDOM") == 27
    assert 1 <= strategies.count("INLP") <= 8


def test_bad_strategy_is_usage_error(ingested, tmp_path):
    d = ingested["two"]
    rc = main(["debias", "--space", str(d / "space.txt"), "--dataset", str(d / "dataset.json"), "--out-pipeline", str(tmp_path / "p.json"), "--strategy", "MP+Q3"])
    assert rc == EXIT_USAGE


def test_parse_strategy():
    assert parse_strategy("MP+R34") == [StrategyToken("MP"), StrategyToken("RANDOM", 34)]
    assert parse_strategy("inlp8 + random27") == [StrategyToken("INLP", 8), StrategyToken("RANDOM", 27)]
    assert [str(t) for t in parse_strategy("TMP+INLP")] == ["TMP", "INLP"]
    for bad in ("", "MP+", "X", "R"):
        with pytest.raises(ValueError):
            parse_strategy(bad)


# ---- evaluate ----------------------------------------------------------------------------


def test_evaluate_identity(synth_dir, ingested, tmp_path):
    space = ingested["two"] / "space.txt"
    empty = tmp_path / "empty.json"
    ProjectionPipeline((), "", 12).save(empty)
    out = tmp_path / "ev.json"
    rc = main([
        "evaluate", "--before", str(space), "--pipeline", str(empty),
        "--similarity", str(synth_dir / "similarity.tsv"),
        "--neighbor-tokens", "m0,f0,w0,w1", "--out", str(out),
    ])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    validate_report(report)
    assert report["metrics"]["neighbors/changed"]["after"] == 0
    sim = report["metrics"]["similarity/similarity.tsv"]
    assert sim["before"] == sim["after"]


def test_evaluate_full_report(synth_dir, ingested, tmp_path):
    pipe_path = tmp_path / "pipe.json"
    d = ingested["two"]
    assert main(["debias", "--space", str(d / "space.txt"), "--dataset", str(d / "dataset.json"), "--out-pipeline", str(pipe_path)]) == EXIT_OK
    weat = json.loads((synth_dir / "weat.json").read_text())
    weat["targets_X"].append("not-a-word")
    weat_path = tmp_path / "weat.json"
    weat_path.write_text(json.dumps(weat))
    preds = tmp_path / "preds.csv"
    preds.write_text("true,predicted,group\nA,A,F\nA,B,M\nB,B,F\nB,B,M\n")
    rates = tmp_path / "rates.json"
    rates.write_text('{"A": 0.7, "B": 0.4}')
    out = tmp_path / "ev.json"
    rc = main([
        "evaluate", "--before", str(d / "space.txt"), "--pipeline", str(pipe_path),
        "--weat", str(weat_path), "--bias-tokens", "w0,w1,w2", "--bias-direction", "he,she", "--bias-k", "10",
        "--predictions", str(preds), "--group-rates", str(rates), "--out", str(out),
    ])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    validate_report(report)
    assert report["details"]["weat/planted-weat"]["dropped_count"] == 1
    assert report["metrics"]["tpr/gap_rms"]["after"] == pytest.approx(np.sqrt(1 / 2))
    assert "bias_by_neighbor/percentage" in report["metrics"]


def test_schema_rejects_malformed_report():
    with pytest.raises(jsonschema.ValidationError):
        validate_report({"kind": "evaluation", "metrics": {}})


# ---- experiment ----------------------------------------------------------------------------


def test_experiment_ten_runs(synth_dir, tmp_path):
    out = tmp_path / "rep.json"
    rc = main(["experiment", "--config", str(small_config(synth_dir, tmp_path)), "--runs", "10", "--out", str(out)])
    assert rc == EXIT_OK
    rep = json.loads(out.read_text())
    validate_report(rep)
    traj = rep["trajectories"]["similarity/similarity.tsv"]
    assert len(traj["mean"]) == 1 + 6
    assert traj["count"] == [10] * 7
    assert all(lo <= m <= hi for lo, m, hi in zip(traj["ci_low"], traj["mean"], traj["ci_high"]))
    assert rep["provenance"]["seeds"] == list(range(10))
    assert all(p["steps"] == 6 for p in rep["pipelines"])


def test_experiment_single_run_has_null_spread(synth_dir, tmp_path):
    cfg = load_config(small_config(synth_dir, tmp_path, runs=1))
    rep = run_experiment(cfg)
    validate_report(rep)
    agg = rep["metrics"]["similarity/similarity.tsv"]
    assert agg["stdev"] is None and agg["ci95"] is None


def strip_created(text):
    rep = json.loads(text)
    del rep["provenance"]["created"]
    return json.dumps(rep, sort_keys=True)


def test_experiment_deterministic(synth_dir, tmp_path):
    cfg = small_config(synth_dir, tmp_path, runs=3)
    outs = []
    for i, workers in enumerate(("1", "1", "2")):
        out = tmp_path / f"r{i}.json"
        assert main(["experiment", "--config", str(cfg), "--workers", workers, "--out", str(out)]) == EXIT_OK
        outs.append(out.read_text())
    assert strip_created(outs[0]) == strip_created(outs[1])
    # the worker count is echoed in the config, everything else matches
    a, b = json.loads(strip_created(outs[0])), json.loads(strip_created(outs[2]))
    for rep in (a, b):
        rep["config"].pop("workers")
        rep["provenance"].pop("config_hash")
    assert a == b


def test_experiment_bad_config(synth_dir, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"embeddings": {"path": str(synth_dir / "embeddings.txt")}, "runs": 0}))
    assert main(["experiment", "--config", str(path), "--out", str(tmp_path / "o.json")]) == EXIT_USAGE
    path.write_text("embeddings: [unclosed\n")
    assert main(["experiment", "--config", str(path), "--out", str(tmp_path / "o.json")]) == EXIT_USAGE


def test_aggregate_interval():
    a = aggregate([1.0, 2.0, 3.0, 4.0])
    sd = np.std([1, 2, 3, 4], ddof=1)
    assert a["stdev"] == pytest.approx(sd)
    assert a["ci95"] == pytest.approx([2.5 - 1.96 * sd / 2, 2.5 + 1.96 * sd / 2])


# ---- misc commands ---------------------------------------------------------------------------


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["debias", "--space", "x"]) == EXIT_USAGE


def test_verify_small_suite(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify-theorems", "--suite", "depth-bound", "--instances", "20", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["suites"][0]["ok"] is True


def test_data_dir_env(synth_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("PROJDEBIAS_DATA_DIR", str(synth_dir))
    monkeypatch.chdir(tmp_path)
    rc = main(["ingest", "--embeddings", "embeddings.txt", "--k", "5", "--out-dir", str(tmp_path / "o")])
    assert rc == EXIT_OK
