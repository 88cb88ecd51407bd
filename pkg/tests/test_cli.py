import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import bump_series
from warpbench.cli import dispatch
from warpbench.data import Dataset, TimeSeries, save_dataset, save_series


@pytest.fixture
def toy_pair(tmp_path):
    a = tmp_path / "a.tsv"
    b = tmp_path / "b.tsv"
    save_series(TimeSeries(np.array([1.0, 1, 0, 0, 0, 1, 0])), str(a))
    save_series(TimeSeries(np.array([0.0, 1, 1, 0, 0, 0, 1])), str(b))
    return str(a), str(b)


@pytest.fixture
def toy_dataset(tmp_path, rng):
    samples = [bump_series(24, float(c)) for c in rng.uniform(6, 10, size=4)]
    samples += [TimeSeries(3.0 + bump_series(24, float(c)).values) for c in rng.uniform(14, 18, size=4)]
    ds = Dataset(samples, labels=np.array([0, 0, 0, 0, 1, 1, 1, 1]))
    path = tmp_path / "data.tsv"
    save_dataset(ds, str(path))
    return str(path)


def test_distance_prints_cost(capsys, toy_pair):
    a, b = toy_pair
    assert dispatch(["distance", "--kind", "dtw", a, b]) == 0
    out = capsys.readouterr().out.strip()
    assert float(out.splitlines()[0]) == 2.0


def test_distance_ed_and_path_json(capsys, toy_pair):
    a, b = toy_pair
    assert dispatch(["distance", "--kind", "ed", a, b]) == 0
    assert float(capsys.readouterr().out.strip()) == 2.0
    assert dispatch(["distance", "--kind", "dtw", "--path", a, b]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    path = json.loads("".join(lines[1:]))
    assert path[0] == [1, 1] and path[-1] == [7, 7]


def test_distance_output_dir_writes_run_json(tmp_path, capsys, toy_pair):
    a, b = toy_pair
    out = tmp_path / "out"
    assert dispatch(["distance", "--kind", "msm", "--msm-cost", "0.5", a, b,
                     "-o", str(out)]) == 0
    run = json.loads((out / "run.json").read_text())
    assert run["subcommand"] == "distance" and run["msm_cost"] == 0.5
    assert (out / "distance.json").exists()


def test_missing_file_exits_2(capsys, tmp_path):
    rc = dispatch(["distance", str(tmp_path / "no.tsv"), str(tmp_path / "no2.tsv")])
    assert rc == 2
    assert "no.tsv" in capsys.readouterr().err


def test_unknown_flag_exits_1(capsys, toy_pair):
    a, b = toy_pair
    assert dispatch(["distance", "--bogus", a, b]) == 1
    assert dispatch(["nonsense"]) == 1


def test_average_writes_prototype_and_run(tmp_path, toy_dataset):
    out = tmp_path / "proto.tsv"
    assert dispatch(["average", "--method", "dba", toy_dataset, "-o", str(out)]) == 0
    proto = np.loadtxt(out)
    assert proto.shape == (24,)
    run = json.loads((tmp_path / "run.json").read_text())
    assert run["method"] == "dba" and run["converged"] is True


def test_extend_doubles_rows(tmp_path, rng):
    samples = [bump_series(16, float(c)) for c in rng.uniform(5, 10, size=5)]
    ds = Dataset(samples, labels=rng.uniform(0, 1, size=5))
    src = tmp_path / "scores.tsv"
    save_dataset(ds, str(src))
    out = tmp_path / "extended.tsv"
    assert dispatch(["extend", "--neighbors", "2", "--reach", "2", str(src),
                     "-o", str(out)]) == 0
    lines = [ln for ln in out.read_text().splitlines() if ln.strip()]
    assert len(lines) == 10


def test_cluster_outputs_and_ari(tmp_path, capsys, toy_dataset):
    out = tmp_path / "result.json"
    labels = tmp_path / "labels.txt"
    labels.write_text("\n".join("00001111"))
    rc = dispatch(["cluster", "--k", "2", "--distance", "dtw", "--avg", "dba",
                   "--seed", "3", toy_dataset, "-o", str(out), "--ari", str(labels)])
    assert rc == 0
    ari = float(capsys.readouterr().out.strip())
    assert ari == 1.0
    payload = json.loads(out.read_text())
    assert len(payload["assignments"]) == 8
    assert payload["converged"] is True
    assert (tmp_path / "run.json").exists()
    for c in payload["centroid_files"]:
        assert np.loadtxt(c).shape == (24,)


def test_cluster_incoherent_pair_exits_2(tmp_path, toy_dataset):
    rc = dispatch(["cluster", "--k", "2", "--distance", "dtw", "--avg", "mean",
                   toy_dataset, "-o", str(tmp_path / "r.json")])
    assert rc == 2


def test_filters_header_and_values(tmp_path, rng):
    src = tmp_path / "x.tsv"
    save_series(TimeSeries(np.cumsum(rng.uniform(0.1, 1.0, 30))), str(src))
    out = tmp_path / "features.tsv"
    assert dispatch(["filters", "--lengths", "4,8", str(src), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    header = lines[0].split("\t")
    assert header == ["increasing_4", "decreasing_4", "peak_4",
                      "increasing_8", "decreasing_8", "peak_8"]
    values = np.loadtxt(str(out), skiprows=1)
    assert values.shape == (30 - 7, 6)
    assert np.all(values >= 0.0)


def test_eval_gen_report(tmp_path, rng):
    real = rng.standard_normal((24, 3))
    gen = rng.standard_normal((20, 3)) * 1.1
    real_p = tmp_path / "real.csv"
    gen_p = tmp_path / "gen.csv"
    np.savetxt(real_p, real, delimiter=",")
    np.savetxt(gen_p, gen, delimiter=",")
    out = tmp_path / "report.json"
    rc = dispatch(["eval-gen", "--real", str(real_p), "--gen", str(gen_p),
                   "--k", "3", "--s", "5", "--r", "2", "--seed", "0",
                   "-o", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    for name in ("fid", "precision", "density", "recall", "coverage", "apd", "mms"):
        assert "value" in payload[name]
        assert payload[name]["params"] is not None
    assert (tmp_path / "run.json").exists()


def test_eval_gen_wpd_and_labels(tmp_path, rng):
    real = rng.standard_normal((20, 3))
    gen = rng.standard_normal((20, 3))
    files = {}
    for name, arr in [("real.csv", real), ("gen.csv", gen)]:
        np.savetxt(tmp_path / name, arr, delimiter=",")
        files[name] = str(tmp_path / name)
    for name, arr in [("lr.txt", rng.integers(0, 2, 20)), ("lg.txt", rng.integers(0, 2, 20))]:
        np.savetxt(tmp_path / name, arr, fmt="%d")
        files[name] = str(tmp_path / name)
    raw = Dataset([TimeSeries(rng.standard_normal(12)) for _ in range(10)],
                  labels=np.zeros(10, dtype=int))
    save_dataset(raw, str(tmp_path / "raw_r.tsv"))
    save_dataset(raw, str(tmp_path / "raw_g.tsv"))
    out = tmp_path / "report.json"
    rc = dispatch(["eval-gen", "--real", files["real.csv"], "--gen", files["gen.csv"],
                   "--labels-real", files["lr.txt"], "--labels-gen", files["lg.txt"],
                   "--raw-real", str(tmp_path / "raw_r.tsv"),
                   "--raw-gen", str(tmp_path / "raw_g.tsv"),
                   "--k", "3", "--s", "4", "--r", "2", "-o", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert "acpd" in payload and "wpd" in payload
    assert payload["wpd"]["real_reference"] == payload["wpd"]["value"]  # same raw set


def _write_results_csv(path, rng, comparates=("A", "B", "C"), n=12):
    cols = {c: rng.uniform(0.5, 1.0, n) for c in comparates}
    with open(path, "w") as fh:
        fh.write("dataset," + ",".join(comparates) + "\n")
        for i in range(n):
            fh.write(f"d{i}," + ",".join(format(cols[c][i], ".6f") for c in comparates) + "\n")


def test_mcm_outputs(tmp_path, rng):
    src = tmp_path / "results.csv"
    _write_results_csv(str(src), rng)
    out = tmp_path / "out"
    assert dispatch(["mcm", str(src), "-o", str(out)]) == 0
    assert (out / "mcm.json").exists()
    assert (out / "run.json").exists()
    assert (out / "mcm.csv").read_text().startswith("row,col,")
    grid = (out / "mcm.txt").read_text()
    assert "p=" in grid
    payload = json.loads((out / "mcm.json").read_text())
    assert payload["schema_version"] == 1
    assert len(payload["cells"]) == 6


def test_mcm_row_col_subsets(tmp_path, rng):
    src = tmp_path / "results.csv"
    _write_results_csv(str(src), rng)
    out = tmp_path / "out"
    assert dispatch(["mcm", str(src), "--rows", "A", "--cols", "B,C", "-o", str(out)]) == 0
    payload = json.loads((out / "mcm.json").read_text())
    assert {(c["row"], c["col"]) for c in payload["cells"]} == {("A", "B"), ("A", "C")}


def test_mcm_byte_identical_reruns(tmp_path, rng):
    src = tmp_path / "results.csv"
    _write_results_csv(str(src), rng)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert dispatch(["mcm", str(src), "-o", str(out1)]) == 0
    assert dispatch(["mcm", str(src), "-o", str(out2)]) == 0
    assert (out1 / "mcm.json").read_bytes() == (out2 / "mcm.json").read_bytes()
    assert (out1 / "run.json").read_text().replace("o1", "o2") == (out2 / "run.json").read_text()


def test_mcm_bad_header_exits_2(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("name,A,B\nd0,0.5,0.6\n")
    assert dispatch(["mcm", str(src), "-o", str(tmp_path / "o")]) == 2


def test_entry_point_subprocess(toy_pair):
    a, b = toy_pair
    proc = subprocess.run(
        [sys.executable, "-m", "warpbench.cli", "distance", "--kind", "ed", a, b],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert float(proc.stdout.strip()) == 2.0
