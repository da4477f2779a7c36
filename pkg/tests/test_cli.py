import csv
import json

import numpy as np
import pytest

from dismet.cli import main
from dismet.io import read_factors, read_reps, write_factors, write_reps
from dismet.scenarios import ScenarioSpec, generate


@pytest.fixture
def identity_pair(tmp_path):
    prefix = str(tmp_path / "id")
    assert main(["gen", "--grid", "3,4", "--replication", "20", "--out", prefix]) == 0
    return prefix + ".csv", prefix + ".drep"


@pytest.fixture
def duplicated_pair(tmp_path):
    f, r = generate(ScenarioSpec("duplicated", 4))
    write_factors(f, tmp_path / "d.csv")
    write_reps(r, tmp_path / "d.drep")
    return str(tmp_path / "d.csv"), str(tmp_path / "d.drep")


def test_gen_writes_pair(tmp_path):
    prefix = str(tmp_path / "ds")
    code = main(["gen", "--dataset", "dsprites", "--mode", "sample", "--n", "500",
                 "--encoder", "random-projection:100", "--out", prefix])
    assert code == 0
    assert read_factors(prefix + ".csv").n == 500
    assert read_reps(prefix + ".drep").values.shape == (500, 100)


def test_eval_two_reports(identity_pair, tmp_path):
    f, r = identity_pair
    out = tmp_path / "r.json"
    code = main(["eval", "--metrics", "med,mig", "--factors", f, "--reps", r, "--seeds", "0,1,2",
                 "--out", str(out)])
    assert code == 0
    reports = json.loads(out.read_text())
    assert [x["metric"] for x in reports] == ["med", "mig"]
    assert reports[0]["scores"] == [1.0, 1.0, 1.0] and reports[0]["std"] == 0.0
    assert reports[0]["display"] == "100.0 (0.0)"


def test_eval_byte_identical_across_runs_and_threads(identity_pair, tmp_path):
    f, r = identity_pair
    args = ["eval", "--metrics", "med,topk_med,sap,factorvae,betavae,downstream", "--factors", f,
            "--reps", r, "--seeds", "0,1", "--num-train", "300", "--num-eval", "200"]
    outs = []
    for threads in ("1", "1", "4"):
        p = tmp_path / f"o{len(outs)}.json"
        assert main(args + ["--threads", threads, "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_eval_threads_from_environment(identity_pair, tmp_path, monkeypatch):
    f, r = identity_pair
    monkeypatch.setenv("DISMET_THREADS", "3")
    assert main(["eval", "--factors", f, "--reps", r, "--out", str(tmp_path / "a.json")]) == 0
    monkeypatch.setenv("DISMET_THREADS", "zero")
    assert main(["eval", "--factors", f, "--reps", r, "--out", str(tmp_path / "a.json")]) == 2


def test_eval_errors(identity_pair, tmp_path, capsys):
    f, r = identity_pair
    assert main(["eval", "--metrics", "nope", "--factors", f, "--reps", r]) == 2
    assert "valid names" in capsys.readouterr().err
    assert main(["eval", "--factors", f, "--reps", str(tmp_path / "missing.drep")]) == 2
    bad = tmp_path / "bad.drep"
    bad.write_bytes(b"XREP" + bytes(20))
    assert main(["eval", "--factors", f, "--reps", str(bad)]) == 2
    write_reps(np.zeros((240, 2)), tmp_path / "z.drep")
    assert main(["eval", "--metrics", "factorvae", "--factors", f, "--reps", str(tmp_path / "z.drep")]) == 3
    write_reps(np.zeros((5, 2)), tmp_path / "short.drep")
    assert main(["eval", "--factors", f, "--reps", str(tmp_path / "short.drep")]) == 2


def test_topk_duplicated(duplicated_pair, tmp_path):
    f, r = duplicated_pair
    out = tmp_path / "t.json"
    assert main(["topk", "--k", "2", "--factors", f, "--reps", r, "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["picked"] == [0, 1, 2, 3] and res["topk_med"] == 1.0
    assert main(["topk", "--k-list", "1,2", "--format", "csv", "--factors", f, "--reps", r,
                 "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[1] == ["1", "1.0", "0 1"] and rows[2] == ["2", "1.0", "0 1 2 3"]


def test_cooccur_and_heatmap(duplicated_pair, tmp_path):
    f, r = duplicated_pair
    out = tmp_path / "c.csv"
    assert main(["cooccur", "--factors", f, "--reps", r, "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows == [["factor", "F0", "F1"], ["F0", "1.0", "0.0"], ["F1", "0.0", "1.0"]]
    assert main(["heatmap", "--factors", f, "--reps", r, "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["factor", "dim0", "dim1", "dim2", "dim3"]
    assert [float(x) for x in rows[1][1:]] == [0.5, 0.0, 0.5, 0.0]


def test_scenario_pass_and_fail(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["scenario", "--kind", "copy-average", "--dims", "3,1000", "--out", str(out)]) == 0
    rows = {(r["D"], r["metric"]): r for r in csv.DictReader(open(out))}
    assert abs(float(rows[("3", "med")]["value"]) - 0.7689509398133516) < 1e-12
    assert abs(float(rows[("1000", "med")]["value"]) - 0.30823911380117464) < 1e-12
    assert main(["scenario", "--kind", "duplicated", "--dims", "4,10", "--out", str(out)]) == 0
    rows = {(r["D"], r["metric"]): r for r in csv.DictReader(open(out))}
    assert float(rows[("10", "med")]["value"]) == 1.0 and float(rows[("10", "mig")]["value"]) == 0.0
    assert main(["scenario", "--kind", "copy-average", "--dims", "3", "--base", "k", "--out", str(out)]) == 4
    assert "oracle mismatch" in capsys.readouterr().err


def test_sweep(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["sweep", "--dims", "3,10,100", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "kind,D,metric,value" and len(lines) == 10
    assert main(["sweep", "--metrics", "bogus", "--out", str(out)]) == 2


def test_probe(identity_pair, tmp_path):
    f, r = identity_pair
    out, ds = tmp_path / "p.csv", tmp_path / "d.csv"
    assert main(["probe", "--factors", f, "--reps", r, "--factor", "f1", "--out", str(out),
                 "--downstream-out", str(ds), "--seeds", "0,1"]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["factor", "dim0", "dim1"] and rows[1][0] == "f1"
    assert float(rows[1][1]) == 0.0 and float(rows[1][2]) > 0
    acc = list(csv.DictReader(open(ds)))
    assert len(acc) == 6 and all(float(a["accuracy"]) >= 0.99 for a in acc)
    assert main(["probe", "--factors", f, "--reps", r, "--pca", "2", "--k", "1", "--out", str(out)]) == 0
    assert main(["probe", "--factors", f, "--reps", r, "--factor", "zzz", "--out", str(out)]) == 2


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "dismet", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "scenario" in res.stdout
