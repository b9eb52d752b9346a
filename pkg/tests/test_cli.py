from __future__ import annotations

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from adsbfuel.cli import run, stream_seed
from adsbfuel.emissions import import_csv
from adsbfuel.trajectory import load_track

TRAIN = ["--hidden", "16,8", "--epochs", "8", "--batch-size", "32", "--lr", "0.1"]


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run(["--seed", "5", "synth", "--tracks", "3", "--out-dir", str(d / "tracks")]) == 0
    assert run(["--seed", "5", "synth", "--samples", "600", "--n-h", "6", "--n-v", "6", "--dataset", str(d / "ds.jsonl")]) == 0
    assert run(["--seed", "5", "train", "--dataset", str(d / "ds.jsonl"), "--out", str(d / "model.json"), *TRAIN]) == 0
    return d


def test_synth_outputs(work):
    names = sorted(os.listdir(work / "tracks"))
    assert names == [f"flight_0000{i}.{ext}" for i in range(3) for ext in ("csv", "json")]
    tr = load_track(work / "tracks" / "flight_00000.csv")
    assert tr.meta is not None and tr.duration > 0
    lines = (work / "ds.jsonl").read_text().splitlines()
    assert len(lines) == 600
    assert {"q_true", "alpha", "beta", "meta"} <= set(json.loads(lines[0]))


def test_predict_prints_one_number(work, capsys):
    capsys.readouterr()
    code = run(["predict", "--model", str(work / "model.json"), "--track", str(work / "tracks" / "flight_00000.csv")])
    out = capsys.readouterr().out.strip().splitlines()
    assert code == 0 and len(out) == 1
    assert float(out[0]) > 0
    code = run(
        ["predict", "--model", str(work / "model.json"), "--track", str(work / "tracks" / "flight_00001.csv"),
         "--start", "100", "--end", "700"]
    )
    assert code == 0 and float(capsys.readouterr().out) > 0


def test_unknown_subcommand(capsys):
    assert run(["fly"]) == 1
    err = capsys.readouterr().err
    assert err.startswith("code=UsageError")
    assert run([]) == 1


def test_missing_file_is_input_error(work, capsys):
    assert run(["predict", "--model", str(work / "nope.json"), "--track", str(work / "tracks" / "flight_00000.csv")]) == 1
    assert capsys.readouterr().err.startswith("code=FileNotFoundError")


def test_corrupt_model_code(work, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text((work / "model.json").read_text()[:100])
    assert run(["predict", "--model", str(bad), "--track", str(work / "tracks" / "flight_00000.csv")]) == 1
    assert capsys.readouterr().err.startswith("code=CorruptModel")


def test_train_is_deterministic(work, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(["--seed", "5", "train", "--dataset", str(work / "ds.jsonl"), "--out", str(out), *TRAIN]) == 0
    assert a.read_bytes() == b.read_bytes() == (work / "model.json").read_bytes()


def test_failed_train_leaves_no_file(work, tmp_path, capsys):
    ds = tmp_path / "bad.jsonl"
    ds.write_text((work / "ds.jsonl").read_text().splitlines()[0] + "\n{broken\n")
    out = tmp_path / "m.json"
    assert run(["train", "--dataset", str(ds), "--out", str(out), *TRAIN]) == 1
    assert not out.exists()
    assert os.listdir(tmp_path) == ["bad.jsonl"]


def test_config_file_and_override(work, tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"seed": 5, "hidden": "16,8", "epochs": 8, "batch-size": 32, "lr": 0.1}))
    out = tmp_path / "m.json"
    assert run(["--config", str(conf), "train", "--dataset", str(work / "ds.jsonl"), "--out", str(out)]) == 0
    assert out.read_bytes() == (work / "model.json").read_bytes()
    out2 = tmp_path / "m2.json"
    assert run(["--config", str(conf), "train", "--dataset", str(work / "ds.jsonl"), "--out", str(out2), "--epochs", "2"]) == 0
    assert json.loads(out2.read_text())["config"]["epochs"] == 2
    conf.write_text(json.dumps({"bogus": 1}))
    assert run(["--config", str(conf), "train", "--dataset", "x", "--out", "y"]) == 1


def test_featurize_and_eval(work, capsys):
    capsys.readouterr()
    assert run(["featurize", str(work / "tracks"), "--n-h", "4", "--n-v", "4"]) == 0
    rows = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert len(rows) == 3 and len(rows[0]["alpha"]) == 5
    assert run(["eval", "--model", str(work / "model.json"), "--dataset", str(work / "ds.jsonl")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "group_kind,group,n,mape,rel_l2"
    assert lines[1].startswith("all,all,600,")
    kinds = {ln.split(",")[0] for ln in lines[1:]}
    assert kinds == {"all", "type", "duration"}
    assert run(["eval", "--model", str(work / "model.json"), "--dataset", str(work / "ds.jsonl"), "--format", "text"]) == 0
    assert "MAPE %" in capsys.readouterr().out


def test_curve_and_grid(work, tmp_path, capsys):
    # a better-trained model keeps the cumulative predictions monotone
    ds = tmp_path / "ds.jsonl"
    model = tmp_path / "model.json"
    assert run(["--seed", "2", "synth", "--samples", "2000", "--n-h", "6", "--n-v", "6", "--dataset", str(ds)]) == 0
    assert run(["--seed", "2", "train", "--dataset", str(ds), "--out", str(model), "--hidden", "32,16", "--epochs", "40",
                "--optimizer", "adam", "--lr", "0.003"]) == 0
    track = work / "tracks" / "flight_00000.csv"
    curve = tmp_path / "curve.csv"
    png = tmp_path / "curve.png"
    code = run(["curve", "--model", str(model), "--track", str(track), "--out", str(curve), "--plot", str(png)])
    assert code == 0, capsys.readouterr().err
    data = np.loadtxt(curve, delimiter=",", skiprows=1)
    assert curve.read_text().startswith("T,Q,q\n")
    assert np.all(np.diff(data[:, 0]) > 0) and np.all(np.diff(data[:, 1]) >= 0) and np.all(data[:, 2] >= 0)
    assert png.stat().st_size > 0
    inv = tmp_path / "inv.csv"
    assert run(["grid", str(work / "tracks"), "--model", str(model), "--out", str(inv)]) == 0
    with open(inv) as fh:
        grid = import_csv(fh)
    assert grid.total() > 0


def test_convergence_table(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    code = run(
        ["--seed", "1", "convergence", "--sizes", "1000,2000,4000", "--radii", "10,20", "--test-size", "300",
         "--hidden", "16,8", "--epochs", "4", "--out", str(out)]
    )
    assert code == 0, capsys.readouterr().err
    lines = out.read_text().splitlines()
    assert lines[0] == "size,N=10,N=20"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["1000", "2000", "4000", "slope"]
    vals = np.array([[float(x) for x in ln.split(",")[1:]] for ln in lines[1:]])
    assert vals.shape == (4, 2) and np.all(vals[:3] > 0) and np.all(np.isfinite(vals))


def test_stream_seeds_are_distinct():
    names = ["init", "shuffle", "synth", "model", "synth-test"]
    seeds = {stream_seed(7, n) for n in names}
    assert len(seeds) == len(names)
    assert stream_seed(7, "synth") == stream_seed(7, "synth")
    assert stream_seed(7, "synth") != stream_seed(8, "synth")


def test_console_script_exit_codes(tmp_path):
    exe = [sys.executable, "-m", "adsbfuel.cli"]
    r = subprocess.run([*exe, "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "adsbfuel" in r.stdout
    r = subprocess.run([*exe, "predict", "--model", str(tmp_path / "x"), "--track", str(tmp_path / "y")],
                       capture_output=True, text=True)
    assert r.returncode == 1 and r.stderr.startswith("code=")


def test_internal_error_exit_code(monkeypatch, capsys):
    import adsbfuel.cli as cli

    def boom(args):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "cmd_featurize", boom)
    assert cli.run(["featurize", "x"]) == 2
    assert capsys.readouterr().err.startswith("code=InternalError")
